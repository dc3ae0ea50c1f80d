#pragma once

// Seeded random streams and inverse-CDF sampling on ordered supports.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "leakmeter/distribution.hpp"

namespace leakmeter {

/// Independent stream identified by (master seed, stream index). Never share across workers.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(stream_index),
                          static_cast<std::uint32_t>(stream_index >> 32), 0x6c6d7472u};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) from the top 53 bits; identical across standard libraries.
    double uniform01() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF draw scanning the support in ascending label order.
inline Label sample(const DiscreteDistribution& d, RngStream& rng) {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0) continue;
        last_positive = i;
        cumulative += d[i];
        if (u < cumulative) return d.label(i);
    }
    return d.label(last_positive);
}

/// Precomputed cumulative table for repeated draws; same outcomes as sample().
class CdfSampler {
public:
    explicit CdfSampler(const DiscreteDistribution& d)
        : labels_(d.support().begin(), d.support().end()), cdf_(d.size()) {
        double cumulative = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            cumulative += d[i];
            cdf_[i] = cumulative;
            if (d[i] > 0.0) last_positive_ = i;
        }
    }

    Label operator()(RngStream& rng) const {
        const double u = rng.uniform01();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        auto i = static_cast<std::size_t>(it - cdf_.begin());
        return labels_[std::min(i, last_positive_)];
    }

private:
    std::vector<Label> labels_;
    std::vector<double> cdf_;
    std::size_t last_positive_ = 0;
};

}  // namespace leakmeter
