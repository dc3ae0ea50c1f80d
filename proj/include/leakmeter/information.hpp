#pragma once

// Divergences, entropy and mutual information in bits.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/numeric.hpp"

namespace leakmeter {

namespace detail {

// Sum of p log2(p/q) over aligned mass vectors; +inf when p > 0 meets q == 0.
inline double kl_masses(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw Error(ErrorCode::SupportMismatch, "divergence arguments differ in length");
    CompensatedSum acc;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return kInfinity;
        acc += p[i] * log_bits(p[i] / q[i]);
    }
    return acc.value();
}

}  // namespace detail

/// D_KL(p || q) in bits. +inf (never floored) when q misses part of p's support.
inline double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (!p.same_support(q))
        throw Error(ErrorCode::SupportMismatch, "kl_divergence requires identical supports");
    return detail::kl_masses(p.masses(), q.masses());
}

inline double shannon_entropy(const DiscreteDistribution& p) {
    CompensatedSum acc;
    for (double m : p.masses())
        if (m > 0.0) acc += -m * log_bits(m);
    return acc.value();
}

inline DiscreteDistribution marginal_theta(const JointDistribution& joint) {
    std::vector<double> masses(joint.theta_size());
    for (std::size_t t = 0; t < joint.theta_size(); ++t) {
        CompensatedSum acc;
        for (double m : joint.row(t)) acc += m;
        masses[t] = acc.value();
    }
    auto support = joint.theta_support();
    return DiscreteDistribution({support.begin(), support.end()}, std::move(masses));
}

inline DiscreteDistribution marginal_x(const JointDistribution& joint) {
    std::vector<double> masses(joint.x_size());
    for (std::size_t x = 0; x < joint.x_size(); ++x) {
        CompensatedSum acc;
        for (std::size_t t = 0; t < joint.theta_size(); ++t) acc += joint(t, x);
        masses[x] = acc.value();
    }
    auto support = joint.x_support();
    return DiscreteDistribution({support.begin(), support.end()}, std::move(masses));
}

/// I(Theta; X) from the definition, summed over theta rows in label order.
inline double mutual_information(const JointDistribution& joint) {
    const auto p_theta = marginal_theta(joint);
    const auto p_x = marginal_x(joint);
    CompensatedSum acc;
    for (std::size_t t = 0; t < joint.theta_size(); ++t) {
        for (std::size_t x = 0; x < joint.x_size(); ++x) {
            const double pj = joint(t, x);
            if (pj == 0.0) continue;
            acc += pj * log_bits(pj / (p_theta[t] * p_x[x]));
        }
    }
    return acc.value();
}

/// p(theta, x) = prior(theta) * like(x | theta).
inline JointDistribution joint_from(const DiscreteDistribution& prior_theta,
                                    const LikelihoodModel& like) {
    if (!std::equal(prior_theta.support().begin(), prior_theta.support().end(),
                    like.theta_support().begin(), like.theta_support().end()))
        throw Error(ErrorCode::SupportMismatch, "prior and likelihood theta grids differ");
    std::vector<double> masses;
    masses.reserve(like.theta_size() * like.x_size());
    for (std::size_t t = 0; t < like.theta_size(); ++t)
        for (double l : like.row(t)) masses.push_back(prior_theta[t] * l);
    auto ts = like.theta_support();
    auto xs = like.x_support();
    return JointDistribution({ts.begin(), ts.end()}, {xs.begin(), xs.end()}, std::move(masses));
}

}  // namespace leakmeter
