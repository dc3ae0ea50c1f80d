#pragma once

// Monte Carlo replication of the Normal/Poisson inspection experiment, with and without a
// secret additive key on the Poisson rate.
//
// Each case draws theta* from the discretized Normal(M, S), generates measurements from the
// true channel, and updates an inspector belief that starts uniform over the prior limits.
// Per-case learning is scored against the point mass at theta*, so the cumulative KL
// learning after k measurements is log2(p_k(theta*) / p_0(theta*)).

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "leakmeter/bayes.hpp"
#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/information.hpp"
#include "leakmeter/measures.hpp"
#include "leakmeter/sampling.hpp"
#include "leakmeter/stats.hpp"

namespace leakmeter {

enum class KeyMode {
    PerWarhead,      // one key value per case, reused for every measurement
    PerMeasurement,  // fresh key value for every measurement
};

struct KeyConfig {
    double mu = 20.0;
    double sigma = 15.0;
    std::optional<Label> y_lo;  // default -(theta_lo - 1), the smallest offset keeping rates >= 1
    std::optional<Label> y_hi;  // default 80
    KeyMode mode = KeyMode::PerWarhead;
};

struct ScenarioConfig {
    double M = 40.0;
    double S = 7.0;  // standard deviation of theta
    Label theta_lo = 1;
    Label theta_hi = 120;
    std::optional<Label> prior_lo;  // inspector's uniform prior limits; default full grid
    std::optional<Label> prior_hi;
    Label x_max = 400;
    std::size_t n_cases = 10000;
    std::size_t n_measurements = 100;
    std::optional<KeyConfig> key;
    std::uint64_t master_seed = 1;
    double span_fraction = 0.3;

    Label effective_prior_lo() const { return prior_lo.value_or(theta_lo); }
    Label effective_prior_hi() const { return prior_hi.value_or(theta_hi); }
    Label key_y_lo() const {
        return key && key->y_lo ? *key->y_lo : -(theta_lo - 1);
    }
    Label key_y_hi() const { return key && key->y_hi ? *key->y_hi : 80; }

    void validate() const {
        auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
        if (!(theta_lo < theta_hi)) fail("theta_lo must be below theta_hi");
        if (theta_lo < 1) fail("theta_lo must be at least 1 (Poisson rates are positive)");
        if (effective_prior_lo() >= effective_prior_hi()) fail("prior_lo must be below prior_hi");
        if (effective_prior_hi() < theta_lo || effective_prior_lo() > theta_hi)
            fail("prior limits do not overlap the theta grid");
        if (!(S > 0.0)) fail("S must be positive");
        if (x_max < 0) fail("x_max must be nonnegative");
        if (n_cases < 1) fail("n_cases must be at least 1");
        if (!(span_fraction > 0.0 && span_fraction < 1.0)) fail("span_fraction must lie in (0, 1)");
        if (key) {
            if (!(key->sigma > 0.0)) fail("key sigma must be positive");
            if (key_y_lo() > key_y_hi()) fail("key y_lo must not exceed y_hi");
        }
    }
};

struct SimulationResult {
    std::vector<CaseMeasures> per_case;
    Aggregates aggregates;
    double prior_entropy = 0.0;  // H(p_0), bits
    double initial_fault = 0.0;  // kl(p_true(Theta) || p_0), bits
};

struct SimulationOptions {
    std::size_t threads = 1;
};

/// Worker count: `requested` (or hardware concurrency) capped by LEAKMETER_THREADS.
inline std::size_t worker_count(std::optional<std::size_t> requested = std::nullopt) {
    std::size_t n = requested.value_or(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("LEAKMETER_THREADS")) {
        char* end = nullptr;
        const unsigned long long cap = std::strtoull(env, &end, 10);
        if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
    }
    return std::max<std::size_t>(n, 1);
}

/// Inspector's likelihood when the rate is theta + y with y ~ key:
/// p(x | theta) = sum_y p(y) Poisson(x; theta + y).
inline LikelihoodModel key_marginalized_likelihood(const std::vector<Label>& theta_support,
                                                   const DiscreteDistribution& key, Label x_max) {
    std::vector<Label> rates;
    for (Label y : key.support())
        for (Label t : theta_support) rates.push_back(t + y);
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
    const auto by_rate = poisson_likelihood(rates, x_max);

    std::vector<std::vector<double>> rows;
    rows.reserve(theta_support.size());
    for (Label t : theta_support) {
        std::vector<CompensatedSum> acc(by_rate.x_size());
        for (std::size_t j = 0; j < key.size(); ++j) {
            if (key[j] == 0.0) continue;
            const auto r = by_rate.row(*by_rate.theta_index(t + key.label(j)));
            for (std::size_t x = 0; x < r.size(); ++x) acc[x] += key[j] * r[x];
        }
        std::vector<double> row(acc.size());
        for (std::size_t x = 0; x < acc.size(); ++x) row[x] = acc[x].value();
        rows.push_back(std::move(row));
    }
    return LikelihoodModel(theta_support, integer_grid(0, x_max), std::move(rows));
}

namespace detail {

// Immutable models shared read-only by all workers.
struct ScenarioModels {
    std::vector<Label> theta_grid;
    DiscreteDistribution p_true_theta;
    DiscreteDistribution inspector_prior;
    LikelihoodModel inspector_like;
    std::optional<DiscreteDistribution> key;
    // Samplers for the true channel, indexed by rate - rate_offset.
    Label rate_offset = 0;
    std::vector<CdfSampler> rate_samplers;
    CdfSampler theta_sampler;
    std::optional<CdfSampler> key_sampler;
};

inline ScenarioModels build_models(const ScenarioConfig& cfg) {
    auto grid = integer_grid(cfg.theta_lo, cfg.theta_hi);
    auto p_true = discretize_normal(cfg.M, cfg.S, grid);
    auto prior = uniform_between(grid, cfg.effective_prior_lo(), cfg.effective_prior_hi());

    std::optional<DiscreteDistribution> key;
    Label rate_lo = cfg.theta_lo;
    Label rate_hi = cfg.theta_hi;
    if (cfg.key) {
        const Label y_lo = cfg.key_y_lo();
        if (cfg.theta_lo + y_lo < 1)
            throw Error(ErrorCode::NonPositiveRate, "theta_lo + key y_lo must be at least 1");
        key = discretize_normal(cfg.key->mu, cfg.key->sigma, integer_grid(y_lo, cfg.key_y_hi()));
        rate_lo += y_lo;
        rate_hi += cfg.key_y_hi();
    }
    auto true_channel = poisson_likelihood(integer_grid(rate_lo, rate_hi), cfg.x_max);
    auto inspector_like = key ? key_marginalized_likelihood(grid, *key, cfg.x_max)
                              : poisson_likelihood(grid, cfg.x_max);

    std::vector<CdfSampler> samplers;
    samplers.reserve(true_channel.theta_size());
    for (std::size_t r = 0; r < true_channel.theta_size(); ++r)
        samplers.emplace_back(true_channel.row_distribution(r));

    CdfSampler theta_sampler(p_true);
    std::optional<CdfSampler> key_sampler;
    if (key) key_sampler.emplace(*key);
    return ScenarioModels{std::move(grid),          std::move(p_true),
                          std::move(prior),         std::move(inspector_like),
                          std::move(key),           rate_lo,
                          std::move(samplers),      std::move(theta_sampler),
                          std::move(key_sampler)};
}

inline CaseMeasures simulate_case(const ScenarioConfig& cfg, const ScenarioModels& m,
                                  std::uint64_t case_index) {
    RngStream rng(cfg.master_seed, case_index);
    CaseMeasures out;
    out.theta_star = m.theta_sampler(rng);

    Label y = 0;
    const bool keyed = m.key_sampler.has_value();
    const bool per_measurement = keyed && cfg.key->mode == KeyMode::PerMeasurement;
    if (keyed && !per_measurement) y = (*m.key_sampler)(rng);

    std::vector<Label> xs(cfg.n_measurements);
    for (auto& x : xs) {
        if (per_measurement) y = (*m.key_sampler)(rng);
        x = m.rate_samplers[static_cast<std::size_t>(out.theta_star + y - m.rate_offset)](rng);
    }

    const auto trajectory = run_sequence(m.inspector_prior, m.inspector_like, xs);
    const auto truth = point_mass(m.theta_grid, out.theta_star);
    const double prior_entropy = shannon_entropy(m.inspector_prior);
    for (std::size_t k = 1; k <= trajectory.size(); ++k) {
        const auto& posterior = trajectory.after(k);
        const auto est = map_estimate(posterior, out.theta_star, cfg.span_fraction);
        out.kl_learning.push_back(realized_learning(truth, trajectory.prior, posterior));
        out.entropy_learning.push_back(prior_entropy - shannon_entropy(posterior));
        out.map_error.push_back(est.error);
        out.span30.push_back(est.span30);
    }
    return out;
}

inline SimulationResult run(const ScenarioConfig& cfg, const SimulationOptions& opts) {
    cfg.validate();
    const auto models = build_models(cfg);

    SimulationResult result;
    result.per_case.resize(cfg.n_cases);
    result.prior_entropy = shannon_entropy(models.inspector_prior);
    result.initial_fault = kl_divergence(models.p_true_theta, models.inspector_prior);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.n_cases; i = next++) {
            try {
                result.per_case[i] = simulate_case(cfg, models, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.n_cases;
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(opts.threads, 1, cfg.n_cases);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.aggregates = aggregate(result.per_case);
    return result;
}

}  // namespace detail

/// Simulation with the inspector using the true Poisson likelihood.
inline SimulationResult run_baseline(const ScenarioConfig& cfg, const SimulationOptions& opts = {}) {
    if (cfg.key) throw Error(ErrorCode::InvalidConfig, "baseline run must not carry a key");
    return detail::run(cfg, opts);
}

/// Simulation with rate theta* + y; the inspector only knows the key distribution.
inline SimulationResult run_secret_key(const ScenarioConfig& cfg,
                                       const SimulationOptions& opts = {}) {
    if (!cfg.key) throw Error(ErrorCode::InvalidConfig, "secret-key run requires key settings");
    return detail::run(cfg, opts);
}

}  // namespace leakmeter
