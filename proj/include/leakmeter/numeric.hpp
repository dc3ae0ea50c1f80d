#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace leakmeter {

/// Every divergence, entropy and learning value in the library is in bits.
inline constexpr double kLogBase = 2.0;

inline double log_bits(double x) noexcept { return std::log2(x); }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite(double bits) noexcept { return std::isinf(bits); }

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        if (std::isinf(v) || std::isinf(sum_)) {
            sum_ += v;
            return;
        }
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double v) noexcept {
        add(v);
        return *this;
    }

    double value() const noexcept { return std::isinf(sum_) ? sum_ : sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

}  // namespace leakmeter
