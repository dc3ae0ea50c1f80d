#pragma once

// Discrete probability types over ordered integer grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leakmeter/error.hpp"
#include "leakmeter/numeric.hpp"

namespace leakmeter {

using Label = std::int64_t;

namespace detail {

inline void check_support(std::span<const Label> support) {
    if (support.empty()) throw Error(ErrorCode::EmptyGrid, "support is empty");
    for (std::size_t i = 1; i < support.size(); ++i) {
        if (support[i] <= support[i - 1])
            throw Error(ErrorCode::InvalidArgument,
                        "support labels must be strictly increasing (index " + std::to_string(i) +
                            ")");
    }
}

// Divides in place by the compensated total unless it is already one to within a few ulps,
// which keeps normalization idempotent. Returns the total before scaling.
inline double normalize_in_place(std::vector<double>& masses) {
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] >= 0.0) || std::isinf(masses[i]))
            throw Error(ErrorCode::NegativeMass,
                        "mass at index " + std::to_string(i) + " is negative or not finite");
    }
    const double total = compensated_sum(masses);
    if (total <= 0.0) throw Error(ErrorCode::AllZero, "all masses are zero");
    if (std::abs(total - 1.0) > 4.0 * std::numeric_limits<double>::epsilon())
        for (double& m : masses) m /= total;
    return total;
}

inline std::optional<std::size_t> find_label(std::span<const Label> support, Label label) {
    auto it = std::lower_bound(support.begin(), support.end(), label);
    if (it == support.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - support.begin());
}

}  // namespace detail

/// Inclusive integer grid lo..hi.
inline std::vector<Label> integer_grid(Label lo, Label hi) {
    if (hi < lo) throw Error(ErrorCode::EmptyGrid, "grid upper bound below lower bound");
    std::vector<Label> grid(static_cast<std::size_t>(hi - lo + 1));
    std::iota(grid.begin(), grid.end(), lo);
    return grid;
}

/// Probability masses over a strictly increasing label grid. Always normalized.
class DiscreteDistribution {
public:
    /// Masses are renormalized to sum to one; throws AllZero / NegativeMass.
    DiscreteDistribution(std::vector<Label> support, std::vector<double> masses)
        : support_(std::move(support)), masses_(std::move(masses)) {
        detail::check_support(support_);
        if (support_.size() != masses_.size())
            throw Error(ErrorCode::LengthMismatch, "support and masses differ in length");
        detail::normalize_in_place(masses_);
    }

    std::size_t size() const noexcept { return masses_.size(); }
    std::span<const Label> support() const noexcept { return support_; }
    std::span<const double> masses() const noexcept { return masses_; }

    Label label(std::size_t i) const { return support_.at(i); }
    double operator[](std::size_t i) const { return masses_[i]; }

    std::optional<std::size_t> index_of(Label label) const {
        return detail::find_label(support_, label);
    }

    /// Zero for labels outside the support.
    double mass_at(Label label) const {
        auto i = index_of(label);
        return i ? masses_[*i] : 0.0;
    }

    bool same_support(const DiscreteDistribution& other) const noexcept {
        return support_ == other.support_;
    }

    Label min_label() const noexcept { return support_.front(); }
    Label max_label() const noexcept { return support_.back(); }

    friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

private:
    std::vector<Label> support_;
    std::vector<double> masses_;
};

inline DiscreteDistribution normalize(std::vector<Label> support, std::vector<double> masses) {
    return DiscreteDistribution(std::move(support), std::move(masses));
}

/// Labels default to 0..n-1.
inline DiscreteDistribution normalize(std::vector<double> masses) {
    if (masses.empty()) throw Error(ErrorCode::EmptyGrid, "no masses given");
    auto support = integer_grid(0, static_cast<Label>(masses.size()) - 1);
    return DiscreteDistribution(std::move(support), std::move(masses));
}

inline DiscreteDistribution uniform(std::vector<Label> support) {
    std::vector<double> masses(support.size(), 1.0);
    return DiscreteDistribution(std::move(support), std::move(masses));
}

/// Uniform over the grid labels in [lo, hi], zero elsewhere on the grid.
inline DiscreteDistribution uniform_between(std::vector<Label> support, Label lo, Label hi) {
    std::vector<double> masses(support.size(), 0.0);
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i] >= lo && support[i] <= hi) masses[i] = 1.0;
    return DiscreteDistribution(std::move(support), std::move(masses));
}

inline DiscreteDistribution point_mass(std::vector<Label> support, Label at) {
    std::vector<double> masses(support.size(), 0.0);
    auto i = detail::find_label(support, at);
    if (!i) throw Error(ErrorCode::InvalidArgument, "point mass label not in support");
    masses[*i] = 1.0;
    return DiscreteDistribution(std::move(support), std::move(masses));
}

/// Grid masses proportional to the Normal(mean, sd) density, renormalized over the grid.
inline DiscreteDistribution discretize_normal(double mean, double sd, std::vector<Label> support) {
    if (support.empty()) throw Error(ErrorCode::EmptyGrid, "normal grid is empty");
    if (!(sd > 0.0) || !std::isfinite(sd))
        throw Error(ErrorCode::InvalidArgument, "standard deviation must be positive");
    std::vector<double> masses(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double z = (static_cast<double>(support[i]) - mean) / sd;
        masses[i] = std::exp(-0.5 * z * z);
    }
    return DiscreteDistribution(std::move(support), std::move(masses));
}

/// Joint masses p(theta, x), stored row-major by theta.
class JointDistribution {
public:
    JointDistribution(std::vector<Label> theta_support, std::vector<Label> x_support,
                      std::vector<double> masses)
        : theta_(std::move(theta_support)), x_(std::move(x_support)), masses_(std::move(masses)) {
        detail::check_support(theta_);
        detail::check_support(x_);
        if (masses_.size() != theta_.size() * x_.size())
            throw Error(ErrorCode::LengthMismatch, "joint masses do not match grid sizes");
        CompensatedSum total;
        for (double m : masses_) {
            if (!(m >= 0.0) || std::isinf(m))
                throw Error(ErrorCode::NegativeMass, "joint mass is negative or not finite");
            total += m;
        }
        if (std::abs(total.value() - 1.0) > 1e-10)
            throw Error(ErrorCode::InvalidArgument, "joint masses do not sum to one");
    }

    std::span<const Label> theta_support() const noexcept { return theta_; }
    std::span<const Label> x_support() const noexcept { return x_; }
    std::size_t theta_size() const noexcept { return theta_.size(); }
    std::size_t x_size() const noexcept { return x_.size(); }

    double operator()(std::size_t theta_index, std::size_t x_index) const {
        return masses_[theta_index * x_.size() + x_index];
    }
    std::span<const double> row(std::size_t theta_index) const {
        return std::span<const double>(masses_).subspan(theta_index * x_.size(), x_.size());
    }

private:
    std::vector<Label> theta_;
    std::vector<Label> x_;
    std::vector<double> masses_;
};

/// Conditional p(x | theta): one normalized row per theta label over a shared x grid.
class LikelihoodModel {
public:
    /// Rows are renormalized individually.
    LikelihoodModel(std::vector<Label> theta_support, std::vector<Label> x_support,
                    std::vector<std::vector<double>> rows)
        : theta_(std::move(theta_support)), x_(std::move(x_support)) {
        detail::check_support(theta_);
        detail::check_support(x_);
        if (rows.size() != theta_.size())
            throw Error(ErrorCode::LengthMismatch, "one likelihood row per theta is required");
        masses_.reserve(theta_.size() * x_.size());
        for (auto& r : rows) {
            if (r.size() != x_.size())
                throw Error(ErrorCode::SupportMismatch, "likelihood row length differs from x grid");
            detail::normalize_in_place(r);
            masses_.insert(masses_.end(), r.begin(), r.end());
        }
    }

    std::span<const Label> theta_support() const noexcept { return theta_; }
    std::span<const Label> x_support() const noexcept { return x_; }
    std::size_t theta_size() const noexcept { return theta_.size(); }
    std::size_t x_size() const noexcept { return x_.size(); }

    std::span<const double> row(std::size_t theta_index) const {
        return std::span<const double>(masses_).subspan(theta_index * x_.size(), x_.size());
    }
    double operator()(std::size_t theta_index, std::size_t x_index) const {
        return masses_[theta_index * x_.size() + x_index];
    }

    DiscreteDistribution row_distribution(std::size_t theta_index) const {
        auto r = row(theta_index);
        return DiscreteDistribution(x_, std::vector<double>(r.begin(), r.end()));
    }

    std::optional<std::size_t> x_index(Label x) const { return detail::find_label(x_, x); }
    std::optional<std::size_t> theta_index(Label theta) const {
        return detail::find_label(theta_, theta);
    }

    friend bool operator==(const LikelihoodModel&, const LikelihoodModel&) = default;

private:
    std::vector<Label> theta_;
    std::vector<Label> x_;
    std::vector<double> masses_;
};

/// Poisson(rate) pmf on 0..x_max, not renormalized.
inline std::vector<double> poisson_pmf(double rate, Label x_max) {
    if (!(rate > 0.0)) throw Error(ErrorCode::NonPositiveRate, "Poisson rate must be positive");
    if (x_max < 0) throw Error(ErrorCode::EmptyGrid, "x_max must be nonnegative");
    std::vector<double> pmf(static_cast<std::size_t>(x_max + 1));
    const double log_rate = std::log(rate);
    for (Label x = 0; x <= x_max; ++x) {
        const double xd = static_cast<double>(x);
        pmf[static_cast<std::size_t>(x)] = std::exp(xd * log_rate - rate - std::lgamma(xd + 1.0));
    }
    return pmf;
}

inline constexpr double kMaxPoissonTailMass = 1e-12;

/// Row for each theta is Poisson(lambda = theta) on 0..x_max, renormalized after a tail check.
inline LikelihoodModel poisson_likelihood(std::vector<Label> theta_support, Label x_max) {
    detail::check_support(theta_support);
    std::vector<std::vector<double>> rows;
    rows.reserve(theta_support.size());
    for (Label theta : theta_support) {
        if (theta <= 0)
            throw Error(ErrorCode::NonPositiveRate,
                        "Poisson rate " + std::to_string(theta) + " is not positive");
        auto pmf = poisson_pmf(static_cast<double>(theta), x_max);
        const double tail = 1.0 - compensated_sum(pmf);
        if (tail > kMaxPoissonTailMass)
            throw Error(ErrorCode::TailMassTooLarge,
                        "x_max " + std::to_string(x_max) + " truncates Poisson(" +
                            std::to_string(theta) + ") tail mass " + std::to_string(tail));
        rows.push_back(std::move(pmf));
    }
    return LikelihoodModel(std::move(theta_support), integer_grid(0, x_max), std::move(rows));
}

}  // namespace leakmeter
