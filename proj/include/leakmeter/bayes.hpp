#pragma once

// Grid Bayesian updating, MAP estimation and credible spans.

#include <cstddef>
#include <cstdlib>
#include <limits>
#include <span>
#include <vector>

#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/numeric.hpp"

namespace leakmeter {

namespace detail {

inline void check_theta_grid(const DiscreteDistribution& belief, const LikelihoodModel& like) {
    if (!std::equal(belief.support().begin(), belief.support().end(),
                    like.theta_support().begin(), like.theta_support().end()))
        throw Error(ErrorCode::SupportMismatch, "belief and likelihood theta grids differ");
}

}  // namespace detail

/// Prior predictive p(x) = sum_theta belief(theta) like(x | theta).
inline DiscreteDistribution predictive(const DiscreteDistribution& belief,
                                       const LikelihoodModel& like) {
    detail::check_theta_grid(belief, like);
    std::vector<double> masses(like.x_size());
    for (std::size_t x = 0; x < like.x_size(); ++x) {
        CompensatedSum acc;
        for (std::size_t t = 0; t < like.theta_size(); ++t) acc += belief[t] * like(t, x);
        masses[x] = acc.value();
    }
    auto xs = like.x_support();
    return DiscreteDistribution({xs.begin(), xs.end()}, std::move(masses));
}

/// One Bayes step on observation x. Throws ZeroPredictive rather than inventing mass.
inline DiscreteDistribution posterior_update(const DiscreteDistribution& belief,
                                             const LikelihoodModel& like, Label x) {
    detail::check_theta_grid(belief, like);
    const auto xi = like.x_index(x);
    if (!xi)
        throw Error(ErrorCode::InvalidArgument,
                    "observation " + std::to_string(x) + " outside the x grid");
    std::vector<double> unnormalized(belief.size());
    CompensatedSum evidence;
    for (std::size_t t = 0; t < belief.size(); ++t) {
        unnormalized[t] = belief[t] * like(t, *xi);
        evidence += unnormalized[t];
    }
    if (!(evidence.value() > 0.0))
        throw Error(ErrorCode::ZeroPredictive,
                    "observation " + std::to_string(x) + " has zero predictive mass");
    auto ts = belief.support();
    return DiscreteDistribution({ts.begin(), ts.end()}, std::move(unnormalized));
}

/// A prior and its posterior after each successive observation.
struct BeliefTrajectory {
    DiscreteDistribution prior;
    std::vector<DiscreteDistribution> posteriors;
    std::vector<Label> observations;

    std::size_t size() const noexcept { return posteriors.size(); }

    /// Belief after `count` observations; 0 gives the prior.
    const DiscreteDistribution& after(std::size_t count) const {
        if (count > posteriors.size())
            throw Error(ErrorCode::IndexOutOfRange, "trajectory has fewer observations");
        return count == 0 ? prior : posteriors[count - 1];
    }

    const DiscreteDistribution& final_belief() const { return after(posteriors.size()); }
};

inline BeliefTrajectory run_sequence(DiscreteDistribution prior, const LikelihoodModel& like,
                                     std::span<const Label> observations) {
    BeliefTrajectory out{std::move(prior), {}, {observations.begin(), observations.end()}};
    out.posteriors.reserve(observations.size());
    for (std::size_t k = 0; k < observations.size(); ++k) {
        const auto& current = k == 0 ? out.prior : out.posteriors.back();
        try {
            out.posteriors.push_back(posterior_update(current, like, observations[k]));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroPredictive) throw;
            throw ZeroPredictiveError(k, e.what());
        }
    }
    return out;
}

inline constexpr double kDefaultSpanFraction = 0.3;

/// Width (hi - lo label difference) of the smallest contiguous window holding theta_hat with
/// at least `mass_fraction` of the belief. Ties go to the smaller width, then the smaller lo.
inline Label credible_span(const DiscreteDistribution& posterior, Label theta_hat,
                           double mass_fraction = kDefaultSpanFraction) {
    if (!(mass_fraction > 0.0 && mass_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "mass fraction must lie in (0, 1)");
    const auto center = posterior.index_of(theta_hat);
    if (!center) throw Error(ErrorCode::InvalidArgument, "theta_hat not in posterior support");

    // Absorbs rounding in prefix differences, e.g. 3 x 0.1 against 0.3.
    constexpr double kMassTolerance = 1e-12;
    const std::size_t n = posterior.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + posterior[i];

    Label best = std::numeric_limits<Label>::max();
    for (std::size_t lo = 0; lo <= *center; ++lo) {
        for (std::size_t hi = *center; hi < n; ++hi) {
            const Label width = posterior.label(hi) - posterior.label(lo);
            if (width >= best) break;
            if (prefix[hi + 1] - prefix[lo] >= mass_fraction - kMassTolerance) {
                best = width;
                break;
            }
        }
    }
    return best == std::numeric_limits<Label>::max() ? posterior.max_label() - posterior.min_label()
                                                     : best;
}

struct MapEstimate {
    Label theta_hat = 0;
    Label error = 0;   // |theta_hat - theta_star|
    Label span30 = 0;  // credible_span at the requested fraction
};

/// Argmax of the posterior, smallest label on ties.
inline Label map_label(const DiscreteDistribution& posterior) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < posterior.size(); ++i)
        if (posterior[i] > posterior[best]) best = i;
    return posterior.label(best);
}

inline MapEstimate map_estimate(const DiscreteDistribution& posterior, Label theta_star,
                                double span_fraction = kDefaultSpanFraction) {
    MapEstimate est;
    est.theta_hat = map_label(posterior);
    est.error = std::abs(est.theta_hat - theta_star);
    est.span30 = credible_span(posterior, est.theta_hat, span_fraction);
    return est;
}

}  // namespace leakmeter
