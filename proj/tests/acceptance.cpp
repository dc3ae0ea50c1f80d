// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include "leakmeter/leakmeter.hpp"
#include "oracles.hpp"

using namespace leakmeter;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

struct Models {
    std::vector<oracle::RandomModel> models;
    std::vector<oracle::Matrix> inspector_rows;
};

Models model_set(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    Models out;
    for (std::size_t i = 0; i < count; ++i) {
        auto m = oracle::random_model(rng, 6, 8);
        oracle::Matrix insp;
        for (std::size_t t = 0; t < m.theta.size(); ++t)
            insp.push_back(oracle::random_masses(rng, m.x.size()));
        out.models.push_back(std::move(m));
        out.inspector_rows.push_back(std::move(insp));
    }
    return out;
}

Outcome a1_decomposition(const Models& set) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& m : set.models) {
        const auto d = class_decomposition(oracle::dist(m.theta, m.p_true), oracle::model(m, m.like),
                                           oracle::dist(m.theta, m.prior));
        worst = std::max(worst, std::abs(d.natural + d.corrective -
                                         oracle::learning_concise(m.p_true, m.like, m.prior)));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 5.0,
            "200 models, max |natural + corrective - double sum| = " + fmt(worst) + " bits, " +
                fmt(secs, 3) + " s"};
}

// Finds two inspector priors on one model where the one with more corrective learning
// also ends with the larger expected posterior fault.
bool corrective_fault_counterexample(const oracle::RandomModel& m, std::string& found) {
    if (m.theta.size() != 2) return false;
    const auto p_true = oracle::dist(m.theta, m.p_true);
    const auto like = oracle::model(m, m.like);
    std::vector<double> corrective, fault;
    for (int i = 1; i < 50; ++i) {
        const auto prior = normalize(m.theta, {i / 50.0, 1.0 - i / 50.0});
        corrective.push_back(class_decomposition(p_true, like, prior).corrective);
        fault.push_back(expected_posterior_fault(p_true, like, prior));
    }
    for (std::size_t a = 0; a < corrective.size(); ++a)
        for (std::size_t b = 0; b < corrective.size(); ++b)
            if (corrective[b] > corrective[a] + 1e-9 && fault[b] > fault[a] + 1e-9) {
                found = "corrective " + fmt(corrective[a]) + " -> " + fmt(corrective[b]) +
                        " bits with fault " + fmt(fault[a]) + " -> " + fmt(fault[b]) + " bits";
                return true;
            }
    return false;
}

Outcome a2_fault_identity(const Models& set) {
    double worst = 0.0;
    for (std::size_t i = 0; i < set.models.size(); ++i) {
        const auto& m = set.models[i];
        const auto p_true = oracle::dist(m.theta, m.p_true);
        const auto prior = oracle::dist(m.theta, m.prior);
        const auto like = oracle::model(m, m.like);
        for (const auto& insp : {like, oracle::model(m, set.inspector_rows[i])}) {
            const double fault = expected_posterior_fault(p_true, like, prior, insp);
            const double total = class_decomposition(p_true, like, prior, insp).total;
            if (!std::isfinite(fault)) continue;
            worst = std::max(worst, std::abs(fault + total - initial_fault(p_true, prior)));
        }
    }
    std::string pair;
    bool found = false;
    for (const auto& m : set.models)
        if ((found = corrective_fault_counterexample(m, pair))) break;
    return {worst <= 1e-10 && found,
            "max |fault + total - initial fault| = " + fmt(worst) + " bits; sweep pair: " +
                (found ? pair : std::string("none found"))};
}

Outcome a3_mutual_information(const Models& set) {
    double worst_corr = 0.0, worst_mi = 0.0;
    for (const auto& m : set.models) {
        const auto p_true = oracle::dist(m.theta, m.p_true);
        const auto d = class_decomposition(p_true, oracle::model(m, m.like), p_true);
        oracle::Matrix joint(m.theta.size());
        for (std::size_t t = 0; t < m.theta.size(); ++t)
            for (double l : m.like[t]) joint[t].push_back(m.p_true[t] * l);
        worst_corr = std::max(worst_corr, std::abs(d.corrective));
        worst_mi = std::max(worst_mi, std::abs(d.total - oracle::mutual_information(joint)));
    }
    return {worst_corr <= 1e-12 && worst_mi <= 1e-12,
            "max |corrective| = " + fmt(worst_corr) + ", max |total - MI| = " + fmt(worst_mi)};
}

Outcome a4_non_negativity() {
    std::mt19937_64 rng(404);
    double min_single = kInfinity, min_corrective = kInfinity;
    for (int i = 0; i < 1000; ++i) {
        const auto m = oracle::random_model(rng, 6, 8);
        const auto like = oracle::model(m, m.like);
        const auto prior = oracle::dist(m.theta, m.prior);
        const Label theta_star = m.theta[std::uniform_int_distribution<std::size_t>(
            0, m.theta.size() - 1)(rng)];
        min_single = std::min(min_single, expected_learning_single(theta_star, like, prior));
        min_corrective = std::min(
            min_corrective,
            class_decomposition(oracle::dist(m.theta, m.p_true), like, prior).corrective);
    }
    return {min_single >= -1e-12 && min_corrective >= -1e-12,
            "1000 pairs, min single-case learning = " + fmt(min_single) +
                ", min corrective = " + fmt(min_corrective)};
}

ScenarioConfig desk_scale() {
    ScenarioConfig cfg;
    cfg.n_cases = 2000;
    cfg.n_measurements = 100;
    cfg.master_seed = 1;
    return cfg;
}

double pooled_abs_corr(const SimulationResult& r, bool use_kl) {
    std::vector<double> xs, ys;
    for (const auto& c : r.per_case)
        for (std::size_t k = 0; k < c.steps(); ++k) {
            const double v = use_kl ? c.kl_learning[k] : c.entropy_learning[k];
            if (!std::isfinite(v)) continue;
            xs.push_back(v);
            ys.push_back(static_cast<double>(c.map_error[k]));
        }
    return std::abs(pearson(xs, ys));
}

Outcome a5_baseline(std::size_t threads) {
    const auto t0 = Clock::now();
    const auto r = run_baseline(desk_scale(), {threads});
    const double secs = seconds_since(t0);
    const auto& a = r.aggregates;
    const double r_kl = std::abs(a.corr_kl_maperr.back());
    const double r_ent = std::abs(a.corr_entropy_maperr.back());
    const bool kl_ok = std::abs(r_kl - 0.88) <= 0.10;
    const bool ent_ok = std::abs(r_ent - 0.45) <= 0.15;
    const bool rising = a.mean_kl.back() > a.mean_kl.front();
    std::cout << "INFO A5 pooled over all steps: |r(kl, err)| = " << fmt(pooled_abs_corr(r, true))
              << ", |r(entropy, err)| = " << fmt(pooled_abs_corr(r, false)) << '\n';
    return {kl_ok && ent_ok && rising && secs < 60.0,
            "step 100 |r(kl, err)| = " + fmt(r_kl) + (kl_ok ? " in" : " outside") +
                " 0.88+-0.10, |r(entropy, err)| = " + fmt(r_ent) + (ent_ok ? " in" : " outside") +
                " 0.45+-0.15, mean kl " + fmt(a.mean_kl.front()) + " -> " + fmt(a.mean_kl.back()) +
                " bits, " + fmt(secs, 3) + " s"};
}

struct KeyedSummary {
    double mean_abs_err = 0.0, negative_kl = 0.0, positive_entropy = 0.0;
};

KeyedSummary keyed_summary(KeyMode mode, std::size_t threads) {
    auto cfg = desk_scale();
    cfg.key = KeyConfig{};
    cfg.key->mode = mode;
    const auto r = run_secret_key(cfg, {threads});
    KeyedSummary s;
    for (const auto& c : r.per_case) {
        s.negative_kl += c.kl_learning.back() < 0.0;
        s.positive_entropy += c.entropy_learning.back() > 0.0;
    }
    const double n = static_cast<double>(r.per_case.size());
    s.negative_kl /= n;
    s.positive_entropy /= n;
    s.mean_abs_err = r.aggregates.mean_abs_map_error.back();
    return s;
}

Outcome a6_secret_key(std::size_t threads) {
    const auto s = keyed_summary(KeyMode::PerWarhead, threads);
    const bool err_ok = std::abs(s.mean_abs_err - 9.5) <= 2.0;
    const bool kl_ok = s.negative_kl >= 0.80;
    const bool ent_ok = s.positive_entropy >= 0.90;
    const auto alt = keyed_summary(KeyMode::PerMeasurement, threads);
    std::cout << "INFO A6 per-measurement key: mean |err| = " << fmt(alt.mean_abs_err)
              << ", negative kl = " << fmt(100 * alt.negative_kl, 3) << "%, positive entropy = "
              << fmt(100 * alt.positive_entropy, 3) << "%\n";
    return {err_ok && kl_ok && ent_ok,
            "step 100 mean |err| = " + fmt(s.mean_abs_err) + (err_ok ? " in" : " outside") +
                " 9.5+-2.0, negative kl = " + fmt(100 * s.negative_kl, 3) + "%" +
                (kl_ok ? " >=" : " <") + " 80%, positive entropy = " +
                fmt(100 * s.positive_entropy, 3) + "%" + (ent_ok ? " >=" : " <") + " 90%"};
}

// Direct enumeration of expected learning after two measurements from prior.
double two_step_expected(const oracle::RandomModel& m) {
    long double acc = 0.0L;
    const std::size_t nx = m.x.size();
    for (std::size_t x1 = 0; x1 < nx; ++x1)
        for (std::size_t x2 = 0; x2 < nx; ++x2) {
            long double z = 0.0L;
            for (std::size_t t = 0; t < m.theta.size(); ++t)
                z += (long double)m.prior[t] * m.like[t][x1] * m.like[t][x2];
            for (std::size_t t = 0; t < m.theta.size(); ++t) {
                const long double pj = (long double)m.p_true[t] * m.like[t][x1] * m.like[t][x2];
                if (pj == 0.0L) continue;
                acc += pj * std::log2((long double)m.like[t][x1] * m.like[t][x2] / z);
            }
        }
    return static_cast<double>(acc);
}

Outcome a7_sequential() {
    std::mt19937_64 rng(707);
    double worst_telescope = 0.0, worst_total = 0.0, worst_gap = -kInfinity;
    for (int i = 0; i < 100; ++i) {
        auto m = oracle::random_model(rng, 5, 5);
        m.prior = m.p_true;
        const auto like = oracle::model(m, m.like);
        const auto p_true = oracle::dist(m.theta, m.p_true);
        const auto prior = oracle::dist(m.theta, m.p_true);

        for (Label x1 : m.x)
            for (Label x2 : m.x) {
                const auto traj = run_sequence(prior, like, std::vector<Label>{x1, x2});
                for (std::size_t t = 0; t < m.theta.size(); ++t) {
                    if (prior[t] == 0.0) continue;
                    const auto truth = point_mass(m.theta, m.theta[t]);
                    const double steps = sequential_step_learning(truth, traj, 1) +
                                         sequential_step_learning(truth, traj, 2);
                    long double z = 0.0L;
                    for (std::size_t u = 0; u < m.theta.size(); ++u)
                        z += (long double)m.prior[u] * m.like[u][static_cast<std::size_t>(x1)] *
                             m.like[u][static_cast<std::size_t>(x2)];
                    const double joint = static_cast<double>(std::log2(
                        (long double)m.like[t][static_cast<std::size_t>(x1)] *
                        m.like[t][static_cast<std::size_t>(x2)] / z));
                    worst_telescope = std::max(worst_telescope, std::abs(steps - joint));
                }
            }

        const double step1 = expected_step_learning(p_true, like, prior, like, 1);
        const double step2 = expected_step_learning(p_true, like, prior, like, 2);
        worst_total = std::max(worst_total, std::abs(step1 + step2 - two_step_expected(m)));
        worst_gap = std::max(worst_gap, step2 - step1);
    }
    return {worst_telescope <= 1e-10 && worst_total <= 1e-10 && worst_gap <= 1e-12,
            "100 models, max telescoping residual = " + fmt(worst_telescope) +
                ", max expected-total residual = " + fmt(worst_total) +
                ", max (step 2 - step 1) = " + fmt(worst_gap) + " bits"};
}

Outcome a8_hyperparameter() {
    const auto grid = integer_grid(1, 120);
    const auto like = poisson_likelihood(grid, 400);
    const std::vector<std::pair<double, double>> hypers{{40, 7}, {30, 10}, {55, 5}, {70, 12}};
    std::vector<DiscreteDistribution> preds;
    for (const auto& [mean, sd] : hypers) preds.push_back(predictive(discretize_normal(mean, sd, grid), like));
    const auto inspector = predictive(uniform(grid), like);

    bool exact_zero = true;
    double worst = 0.0;
    for (std::size_t h = 0; h < hypers.size(); ++h) {
        const auto d = hyperparameter_learning(point_mass({0, 1, 2, 3}, static_cast<Label>(h)),
                                               preds, inspector);
        exact_zero = exact_zero && d.natural == 0.0;
        const auto theta_dist = discretize_normal(hypers[h].first, hypers[h].second, grid);
        const std::vector<double> theta_true(theta_dist.masses().begin(), theta_dist.masses().end());
        oracle::Matrix rows;
        for (std::size_t t = 0; t < grid.size(); ++t) rows.emplace_back(like.row(t).begin(), like.row(t).end());
        const auto px_true = oracle::predictive(theta_true, rows);
        const auto px_insp = oracle::predictive(std::vector<double>(grid.size(), 1.0 / 120.0), rows);
        const double want = oracle::kl(std::vector<double>(px_true.begin(), px_true.end()), px_insp);
        worst = std::max(worst, std::abs(d.total - want));
    }
    return {exact_zero && worst <= 1e-12,
            std::string("natural ") + (exact_zero ? "exactly 0" : "nonzero") +
                " for 4 point masses, max |total - kl(p_true(X) || p_0(X))| = " + fmt(worst)};
}

int run_cli(const std::string& args) {
    const int raw = std::system((std::string(LEAKMETER_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome a9_determinism() {
    ::unsetenv("LEAKMETER_THREADS");
    const auto root = fs::temp_directory_path() / "leakmeter_acceptance";
    fs::remove_all(root);
    const std::string base = "simulate --kind secret-key --config " + std::string(LEAKMETER_FIXTURES) +
                             "/tiny.ini --cases 300 --measurements 100 --seed 11 --out ";
    std::string bytes[3];
    const char* runs[3][2] = {{"a", "1"}, {"b", "1"}, {"c", "8"}};
    for (int i = 0; i < 3; ++i) {
        const auto dir = root / runs[i][0];
        if (run_cli(base + dir.string() + " --threads " + runs[i][1]) != 0)
            return {false, "simulate exited nonzero"};
        bytes[i] = slurp(dir / "trajectories.csv");
    }
    const bool rerun = bytes[0] == bytes[1];
    const bool workers = bytes[0] == bytes[2];
    return {rerun && workers && !bytes[0].empty(),
            "300 cases x 100 steps, " + std::to_string(bytes[0].size()) + " bytes; rerun " +
                (rerun ? "identical" : "differs") + ", 1 vs 8 workers " +
                (workers ? "identical" : "differ")};
}

}  // namespace

int main() {
    const std::size_t threads = worker_count();
    const auto small = model_set(2024, 200);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", [&] { return a1_decomposition(small); }},
        {"A2", [&] { return a2_fault_identity(small); }},
        {"A3", [&] { return a3_mutual_information(small); }},
        {"A4", a4_non_negativity},
        {"A5", [&] { return a5_baseline(threads); }},
        {"A6", [&] { return a6_secret_key(threads); }},
        {"A7", a7_sequential},
        {"A8", a8_hyperparameter},
        {"A9", a9_determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << '\n';
    return failures == 0 ? 0 : 1;
}
