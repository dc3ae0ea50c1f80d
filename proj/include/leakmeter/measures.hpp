#pragma once

// KL-based learning measures: realized and expected learning, the natural/corrective
// decomposition with its mismatch penalty, posterior fault, sequential learning, the
// entropy-change baseline, utility sums and hyperparameter leakage.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "leakmeter/bayes.hpp"
#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/information.hpp"
#include "leakmeter/numeric.hpp"

namespace leakmeter {

struct LearningDecomposition {
    double natural = 0.0;
    double corrective = 0.0;
    double mismatch_penalty = 0.0;  // zero when the inspector's likelihood is the true one
    double total = 0.0;             // natural + corrective - mismatch_penalty
};

namespace detail {

inline void require_same_support(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                 const char* what) {
    if (!a.same_support(b)) throw Error(ErrorCode::SupportMismatch, what);
}

inline void require_same_grids(const LikelihoodModel& a, const LikelihoodModel& b) {
    if (!std::equal(a.theta_support().begin(), a.theta_support().end(),
                    b.theta_support().begin(), b.theta_support().end()) ||
        !std::equal(a.x_support().begin(), a.x_support().end(), b.x_support().begin(),
                    b.x_support().end()))
        throw Error(ErrorCode::SupportMismatch, "likelihood models use different grids");
}

}  // namespace detail

/// sum_theta p_true(theta) log2(posterior(theta) / prior(theta)). Equals
/// kl(p_true || prior) - kl(p_true || posterior); may be negative or +-inf.
inline double realized_learning(const DiscreteDistribution& p_true_theta,
                                const DiscreteDistribution& prior,
                                const DiscreteDistribution& posterior) {
    detail::require_same_support(p_true_theta, prior, "realized_learning: prior grid differs");
    detail::require_same_support(p_true_theta, posterior,
                                 "realized_learning: posterior grid differs");
    CompensatedSum acc;
    for (std::size_t i = 0; i < p_true_theta.size(); ++i) {
        const double w = p_true_theta[i];
        if (w == 0.0) continue;
        const double ratio_bits = posterior[i] > 0.0 && prior[i] > 0.0
                                      ? log_bits(posterior[i] / prior[i])
                                      : log_bits(posterior[i]) - log_bits(prior[i]);
        acc += w * ratio_bits;
    }
    return acc.value();
}

/// Expected learning about one object with known theta*: kl(like(.|theta*) || p0(X)).
inline double expected_learning_single(Label theta_star, const LikelihoodModel& like,
                                       const DiscreteDistribution& inspector_prior) {
    const auto t = like.theta_index(theta_star);
    if (!t) throw Error(ErrorCode::InvalidArgument, "theta* not in likelihood grid");
    return kl_divergence(like.row_distribution(*t), predictive(inspector_prior, like));
}

/// E_theta~p_true { kl(like_true(.|theta) || like_inspector(.|theta)) }.
inline double mismatch_penalty(const DiscreteDistribution& p_true_theta,
                               const LikelihoodModel& like_true,
                               const LikelihoodModel& like_inspector) {
    detail::require_same_grids(like_true, like_inspector);
    CompensatedSum acc;
    for (std::size_t t = 0; t < like_true.theta_size(); ++t) {
        if (p_true_theta[t] == 0.0) continue;
        acc += p_true_theta[t] * detail::kl_masses(like_true.row(t), like_inspector.row(t));
    }
    return acc.value();
}

/// Class-level expected learning split into natural (mutual information), corrective
/// (kl(p_true(X) || p0(X))) and the penalty for a wrong inspector likelihood.
inline LearningDecomposition class_decomposition(const DiscreteDistribution& p_true_theta,
                                                 const LikelihoodModel& like_true,
                                                 const DiscreteDistribution& inspector_prior,
                                                 const LikelihoodModel& like_inspector) {
    detail::require_same_support(p_true_theta, inspector_prior,
                                 "class_decomposition: prior grids differ");
    detail::require_same_grids(like_true, like_inspector);

    LearningDecomposition d;
    const auto joint = joint_from(p_true_theta, like_true);
    d.natural = mutual_information(joint);
    d.corrective =
        kl_divergence(predictive(p_true_theta, like_true), predictive(inspector_prior, like_inspector));
    d.mismatch_penalty = like_true == like_inspector
                             ? 0.0
                             : mismatch_penalty(p_true_theta, like_true, like_inspector);
    d.total = d.natural + d.corrective - d.mismatch_penalty;
    return d;
}

/// Matched-likelihood form.
inline LearningDecomposition class_decomposition(const DiscreteDistribution& p_true_theta,
                                                 const LikelihoodModel& like,
                                                 const DiscreteDistribution& inspector_prior) {
    return class_decomposition(p_true_theta, like, inspector_prior, like);
}

/// kl(p_true(Theta) || p0(Theta)).
inline double initial_fault(const DiscreteDistribution& p_true_theta,
                            const DiscreteDistribution& inspector_prior) {
    return kl_divergence(p_true_theta, inspector_prior);
}

/// sum_{x,theta} p_true(x,theta) log2(p_true(theta) / p0(theta|x)), enumerated over x.
/// Satisfies fault = initial_fault - total learning.
inline double expected_posterior_fault(const DiscreteDistribution& p_true_theta,
                                       const LikelihoodModel& like_true,
                                       const DiscreteDistribution& inspector_prior,
                                       const LikelihoodModel& like_inspector) {
    detail::require_same_support(p_true_theta, inspector_prior,
                                 "expected_posterior_fault: prior grids differ");
    detail::require_same_grids(like_true, like_inspector);
    const auto p0_x = predictive(inspector_prior, like_inspector);
    CompensatedSum acc;
    for (std::size_t x = 0; x < like_true.x_size(); ++x) {
        for (std::size_t t = 0; t < like_true.theta_size(); ++t) {
            const double pj = p_true_theta[t] * like_true(t, x);
            if (pj == 0.0) continue;
            const double post = p0_x[x] > 0.0
                                    ? inspector_prior[t] * like_inspector(t, x) / p0_x[x]
                                    : 0.0;
            if (post == 0.0) return kInfinity;
            acc += pj * log_bits(p_true_theta[t] / post);
        }
    }
    return acc.value();
}

inline double expected_posterior_fault(const DiscreteDistribution& p_true_theta,
                                       const LikelihoodModel& like,
                                       const DiscreteDistribution& inspector_prior) {
    return expected_posterior_fault(p_true_theta, like, inspector_prior, like);
}

/// Realized learning of the k-th observation (1-based) of a trajectory, scored against
/// p_true_theta (a point mass at the case's theta* for single objects). Steps telescope.
inline double sequential_step_learning(const DiscreteDistribution& p_true_theta,
                                       const BeliefTrajectory& trajectory, std::size_t step) {
    if (step == 0 || step > trajectory.size())
        throw Error(ErrorCode::IndexOutOfRange,
                    "step " + std::to_string(step) + " outside 1.." +
                        std::to_string(trajectory.size()));
    return realized_learning(p_true_theta, trajectory.after(step - 1), trajectory.after(step));
}

inline constexpr std::size_t kMaxEnumeratedEntries = 10'000'000;

/// Likelihood of `count` i.i.d. observations. Outcome labels are mixed-radix indices of the
/// per-observation x grid positions, first observation most significant.
inline LikelihoodModel repeated_measurement_likelihood(const LikelihoodModel& like,
                                                       std::size_t count) {
    if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be at least one");
    std::size_t outcomes = 1;
    for (std::size_t i = 0; i < count; ++i) {
        outcomes *= like.x_size();
        if (outcomes * like.theta_size() > kMaxEnumeratedEntries)
            throw Error(ErrorCode::InvalidArgument, "repeated-measurement model too large");
    }
    std::vector<std::vector<double>> rows(like.theta_size());
    for (std::size_t t = 0; t < like.theta_size(); ++t) {
        std::vector<double> row{1.0};
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> next;
            next.reserve(row.size() * like.x_size());
            for (double prefix : row)
                for (double l : like.row(t)) next.push_back(prefix * l);
            row = std::move(next);
        }
        rows[t] = std::move(row);
    }
    auto ts = like.theta_support();
    return LikelihoodModel({ts.begin(), ts.end()},
                           integer_grid(0, static_cast<Label>(outcomes) - 1), std::move(rows));
}

/// Expected learning contributed by the step-th measurement (1-based), by exact
/// enumeration: total(step observations) - total(step - 1 observations).
inline double expected_step_learning(const DiscreteDistribution& p_true_theta,
                                     const LikelihoodModel& like_true,
                                     const DiscreteDistribution& inspector_prior,
                                     const LikelihoodModel& like_inspector, std::size_t step) {
    if (step == 0) throw Error(ErrorCode::IndexOutOfRange, "steps are 1-based");
    auto total_after = [&](std::size_t n) {
        if (n == 0) return 0.0;
        return class_decomposition(p_true_theta, repeated_measurement_likelihood(like_true, n),
                                   inspector_prior,
                                   repeated_measurement_likelihood(like_inspector, n))
            .total;
    };
    return total_after(step) - total_after(step - 1);
}

/// Shannon baseline: H(prior) - H(posterior).
inline double entropy_learning(const DiscreteDistribution& prior,
                               const DiscreteDistribution& posterior) {
    return shannon_entropy(prior) - shannon_entropy(posterior);
}

struct UtilityProperty {
    std::string name;
    double weight = 0.0;
};

struct UtilitySpec {
    std::vector<UtilityProperty> properties;

    void validate() const {
        for (const auto& p : properties)
            if (!std::isfinite(p.weight) || p.weight < 0.0)
                throw Error(ErrorCode::InvalidArgument,
                            "weight for '" + p.name + "' must be finite and nonnegative");
    }
};

/// Fixed-weight privacy utility: sum_i w_i total_i.
inline double utility(const UtilitySpec& spec, std::span<const LearningDecomposition> decomps) {
    spec.validate();
    if (spec.properties.size() != decomps.size())
        throw Error(ErrorCode::LengthMismatch, "one decomposition per utility property required");
    CompensatedSum acc;
    for (std::size_t i = 0; i < decomps.size(); ++i) {
        if (spec.properties[i].weight == 0.0) continue;
        acc += spec.properties[i].weight * decomps[i].total;
    }
    return acc.value();
}

/// Leakage about hyperparameters. `per_hyper_predictives[i]` is p(X | hyper label i of
/// p_true_hyper); natural is I(hyper; X) under p_true_hyper, corrective is
/// kl(p_true(X) || inspector_predictive).
inline LearningDecomposition hyperparameter_learning(
    const DiscreteDistribution& p_true_hyper,
    std::span<const DiscreteDistribution> per_hyper_predictives,
    const DiscreteDistribution& inspector_predictive) {
    if (per_hyper_predictives.size() != p_true_hyper.size())
        throw Error(ErrorCode::LengthMismatch, "one predictive per hyperparameter label required");
    std::vector<std::vector<double>> rows;
    rows.reserve(per_hyper_predictives.size());
    for (const auto& pred : per_hyper_predictives) {
        detail::require_same_support(pred, inspector_predictive,
                                     "hyperparameter predictives use different x grids");
        rows.emplace_back(pred.masses().begin(), pred.masses().end());
    }
    auto hs = p_true_hyper.support();
    auto xs = inspector_predictive.support();
    const LikelihoodModel model({hs.begin(), hs.end()}, {xs.begin(), xs.end()}, std::move(rows));

    // Row form of the mutual information, sum_h p(h) kl(p(X|h) || p(X)): a point-mass
    // hyperparameter gives p(X) == p(X|h*) bit for bit and hence exactly zero.
    const auto p_true_x = predictive(p_true_hyper, model);
    LearningDecomposition d;
    CompensatedSum natural;
    for (std::size_t h = 0; h < model.theta_size(); ++h) {
        if (p_true_hyper[h] == 0.0) continue;
        natural += p_true_hyper[h] * detail::kl_masses(model.row(h), p_true_x.masses());
    }
    d.natural = natural.value();
    d.corrective = kl_divergence(p_true_x, inspector_predictive);
    d.total = d.natural + d.corrective;
    return d;
}

}  // namespace leakmeter
