#pragma once

// Per-step summary statistics across simulated cases.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/numeric.hpp"

namespace leakmeter {

/// Sample Pearson coefficient; nullopt when either series has zero variance.
inline std::optional<double> try_pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw Error(ErrorCode::LengthMismatch, "pearson: series differ in length");
    if (xs.size() < 2) throw Error(ErrorCode::LengthMismatch, "pearson: need at least two points");
    const double n = static_cast<double>(xs.size());
    const double mean_x = compensated_sum(xs) / n;
    const double mean_y = compensated_sum(ys) / n;
    CompensatedSum sxy, sxx, syy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx.value() <= 0.0 || syy.value() <= 0.0) return std::nullopt;
    const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
    return std::clamp(r, -1.0, 1.0);
}

/// Throws Undefined for zero variance.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    auto r = try_pearson(xs, ys);
    if (!r) throw Error(ErrorCode::Undefined, "pearson: a series has zero variance");
    return *r;
}

/// Per-step series for one simulated case; index k holds the value after k + 1 measurements.
struct CaseMeasures {
    Label theta_star = 0;
    std::vector<double> kl_learning;       // cumulative, bits
    std::vector<double> entropy_learning;  // cumulative, bits
    std::vector<Label> map_error;          // |theta_hat - theta_star|
    std::vector<Label> span30;

    std::size_t steps() const noexcept { return kl_learning.size(); }
    bool has_infinite() const noexcept {
        return std::any_of(kl_learning.begin(), kl_learning.end(),
                           [](double v) { return !std::isfinite(v); });
    }
};

/// Per-step aggregates. Non-finite KL values are excluded from the KL statistics;
/// undefined correlations and empty means are NaN.
struct Aggregates {
    std::vector<double> mean_kl, median_kl;
    std::vector<double> mean_entropy, median_entropy;
    std::vector<double> mean_abs_map_error, mean_span30;
    std::vector<double> corr_kl_maperr, corr_entropy_maperr;
    std::vector<double> corr_kl_span, corr_entropy_span;
    std::size_t infinite_cases = 0;

    std::size_t steps() const noexcept { return mean_kl.size(); }
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double mean_of(std::span<const double> v) {
    return v.empty() ? kNaN : compensated_sum(v) / static_cast<double>(v.size());
}

// Lower-middle element for even counts.
inline double median_of(std::vector<double> v) {
    if (v.empty()) return kNaN;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

inline double corr_or_nan(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() < 2) return kNaN;
    return try_pearson(xs, ys).value_or(kNaN);
}

}  // namespace detail

inline Aggregates aggregate(std::span<const CaseMeasures> per_case) {
    if (per_case.empty()) throw Error(ErrorCode::EmptyInput, "aggregate: no cases");
    const std::size_t steps = per_case.front().steps();
    for (const auto& c : per_case) {
        if (c.steps() != steps || c.entropy_learning.size() != steps ||
            c.map_error.size() != steps || c.span30.size() != steps)
            throw Error(ErrorCode::LengthMismatch, "aggregate: cases have unequal step counts");
    }

    Aggregates out;
    for (const auto& c : per_case)
        if (c.has_infinite()) ++out.infinite_cases;

    std::vector<double> kl, kl_err, kl_span, entropy, err, span;
    for (std::size_t k = 0; k < steps; ++k) {
        kl.clear();
        kl_err.clear();
        kl_span.clear();
        entropy.clear();
        err.clear();
        span.clear();
        for (const auto& c : per_case) {
            const double e = static_cast<double>(c.map_error[k]);
            const double s = static_cast<double>(c.span30[k]);
            entropy.push_back(c.entropy_learning[k]);
            err.push_back(e);
            span.push_back(s);
            if (std::isfinite(c.kl_learning[k])) {
                kl.push_back(c.kl_learning[k]);
                kl_err.push_back(e);
                kl_span.push_back(s);
            }
        }
        out.mean_kl.push_back(detail::mean_of(kl));
        out.median_kl.push_back(detail::median_of(kl));
        out.mean_entropy.push_back(detail::mean_of(entropy));
        out.median_entropy.push_back(detail::median_of(entropy));
        out.mean_abs_map_error.push_back(detail::mean_of(err));
        out.mean_span30.push_back(detail::mean_of(span));
        out.corr_kl_maperr.push_back(detail::corr_or_nan(kl, kl_err));
        out.corr_entropy_maperr.push_back(detail::corr_or_nan(entropy, err));
        out.corr_kl_span.push_back(detail::corr_or_nan(kl, kl_span));
        out.corr_entropy_span.push_back(detail::corr_or_nan(entropy, span));
    }
    return out;
}

}  // namespace leakmeter
