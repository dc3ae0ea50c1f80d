// leakmeter: command-line front end for the learning measures and simulations.
//
//   leakmeter simulate --kind baseline|secret-key --config FILE --out DIR
//   leakmeter decompose --model FILE
//   leakmeter utility --spec FILE
//
// Exit codes: 0 success, 2 usage or config error, 3 runtime fault.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leakmeter/config.hpp"
#include "leakmeter/csv.hpp"
#include "leakmeter/leakmeter.hpp"

namespace fs = std::filesystem;
using namespace leakmeter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string bits12(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, ptr);
}

struct SimulateArgs {
    std::string kind;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> cases;
    std::optional<std::size_t> measurements;
    std::optional<std::size_t> threads;
};

nlohmann::json echo(const ScenarioConfig& s) {
    nlohmann::json j;
    j["M"] = s.M;
    j["S"] = s.S;
    j["theta_lo"] = s.theta_lo;
    j["theta_hi"] = s.theta_hi;
    j["prior_lo"] = s.effective_prior_lo();
    j["prior_hi"] = s.effective_prior_hi();
    j["x_max"] = s.x_max;
    j["n_cases"] = s.n_cases;
    j["n_measurements"] = s.n_measurements;
    j["span_fraction"] = s.span_fraction;
    if (s.key) {
        j["key"] = {{"mu", s.key->mu},
                    {"sigma", s.key->sigma},
                    {"y_lo", s.key_y_lo()},
                    {"y_hi", s.key_y_hi()},
                    {"mode", s.key->mode == KeyMode::PerWarhead ? "per_warhead" : "per_measurement"}};
    }
    return j;
}

int cmd_simulate(const SimulateArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    config::RunConfig rc;
    try {
        rc = config::load_scenario(args.config);
        auto& s = rc.scenario;
        if (args.seed) s.master_seed = *args.seed;
        if (args.cases) s.n_cases = *args.cases;
        if (args.measurements) s.n_measurements = *args.measurements;
        if (args.kind == "baseline")
            s.key.reset();
        else if (!s.key)
            s.key = KeyConfig{};
        s.validate();
    } catch (const Error& e) {
        std::cerr << "leakmeter: config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const SimulationOptions opts{worker_count(args.threads)};
        const auto result = args.kind == "baseline" ? run_baseline(rc.scenario, opts)
                                                    : run_secret_key(rc.scenario, opts);

        const fs::path out_dir(args.out);
        fs::create_directories(out_dir);
        const auto traj_path = out_dir / rc.output.trajectories;
        const auto agg_path = out_dir / rc.output.aggregates;
        const auto manifest_path = out_dir / rc.output.manifest;
        {
            std::ofstream f(traj_path, std::ios::binary);
            csv::write_trajectories(f, result);
            if (!f) throw std::runtime_error("cannot write " + traj_path.string());
        }
        {
            std::ofstream f(agg_path, std::ios::binary);
            csv::write_aggregates(f, result.aggregates);
            if (!f) throw std::runtime_error("cannot write " + agg_path.string());
        }

        nlohmann::json manifest;
        manifest["tool"] = "leakmeter";
        manifest["version"] = kVersion;
        manifest["kind"] = args.kind;
        manifest["master_seed"] = rc.scenario.master_seed;
        manifest["config"] = echo(rc.scenario);
        manifest["infinite_cases"] = result.aggregates.infinite_cases;
        manifest["prior_entropy_bits"] = result.prior_entropy;
        manifest["initial_fault_bits"] = result.initial_fault;
        manifest["outputs"] = {traj_path.filename().string(), agg_path.filename().string(),
                               manifest_path.filename().string()};
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream f(manifest_path, std::ios::binary);
        f << manifest.dump(2) << '\n';
        if (!f) throw std::runtime_error("cannot write " + manifest_path.string());

        std::cout << "wrote " << traj_path.string() << ", " << agg_path.string() << ", "
                  << manifest_path.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "leakmeter: runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

struct Decomposed {
    LearningDecomposition parts;
    double initial = 0.0;
    double fault = 0.0;
};

Decomposed decompose(const config::DecompositionModel& m) {
    Decomposed d;
    d.parts = class_decomposition(m.p_true_theta, m.like_true, m.inspector_prior, m.like_inspector);
    d.initial = initial_fault(m.p_true_theta, m.inspector_prior);
    d.fault = expected_posterior_fault(m.p_true_theta, m.like_true, m.inspector_prior,
                                       m.like_inspector);
    return d;
}

constexpr double kIdentityTolerance = 1e-10;

int cmd_decompose(const std::string& model_path) {
    std::optional<config::DecompositionModel> model;
    try {
        model = config::load_model(model_path);
    } catch (const Error& e) {
        std::cerr << "leakmeter: model error: " << e.what() << '\n';
        return kExitConfig;
    }

    Decomposed d;
    try {
        d = decompose(*model);
    } catch (const Error& e) {
        std::cerr << "leakmeter: runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }

    std::cout << "natural_bits = " << bits12(d.parts.natural) << '\n'
              << "corrective_bits = " << bits12(d.parts.corrective) << '\n'
              << "mismatch_penalty_bits = " << bits12(d.parts.mismatch_penalty) << '\n'
              << "total_bits = " << bits12(d.parts.total) << '\n'
              << "initial_fault_bits = " << bits12(d.initial) << '\n'
              << "expected_posterior_fault_bits = " << bits12(d.fault) << '\n';

    bool ok = true;
    const double residual = d.fault + d.parts.total - d.initial;
    if (!std::isfinite(residual)) {
        std::cout << "fault_identity = SKIPPED (infinite terms)\n";
    } else {
        const bool pass = std::abs(residual) <= kIdentityTolerance;
        ok = ok && pass;
        std::cout << "fault_identity = " << (pass ? "PASS" : "FAIL") << " (residual "
                  << bits12(residual) << ")\n";
    }

    const std::map<std::string, double> computed{
        {"natural", d.parts.natural},       {"corrective", d.parts.corrective},
        {"mismatch_penalty", d.parts.mismatch_penalty}, {"total", d.parts.total},
        {"initial_fault", d.initial},       {"expected_posterior_fault", d.fault}};
    for (const auto& [name, want] : model->expected) {
        auto it = computed.find(name);
        if (it == computed.end()) {
            std::cerr << "leakmeter: model error: [expected] " << name << ": unknown quantity\n";
            return kExitConfig;
        }
        const bool pass = std::abs(it->second - want) <= kIdentityTolerance;
        ok = ok && pass;
        std::cout << "expected_" << name << " = " << (pass ? "PASS" : "FAIL") << '\n';
    }
    return ok ? kExitOk : kExitRuntime;
}

int cmd_utility(const std::string& spec_path) {
    std::vector<config::UtilityEntry> entries;
    std::vector<config::DecompositionModel> models;
    try {
        entries = config::load_utility_spec(spec_path);
        for (const auto& e : entries) models.push_back(config::load_model(e.model_path));
    } catch (const Error& e) {
        std::cerr << "leakmeter: spec error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        UtilitySpec spec;
        std::vector<LearningDecomposition> decomps;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            spec.properties.push_back(entries[i].property);
            decomps.push_back(class_decomposition(models[i].p_true_theta, models[i].like_true,
                                                  models[i].inspector_prior,
                                                  models[i].like_inspector));
            std::cout << "property " << entries[i].property.name
                      << " weight = " << bits12(entries[i].property.weight)
                      << " total_bits = " << bits12(decomps.back().total) << '\n';
        }
        std::cout << "utility_bits = " << bits12(utility(spec, decomps)) << '\n';
    } catch (const Error& e) {
        std::cerr << "leakmeter: runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KL-divergence learning measures for inspection protocols"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo baseline or secret-key run");
    simulate->add_option("--kind", sim.kind, "baseline or secret-key")
        ->required()
        ->check(CLI::IsMember({"baseline", "secret-key"}));
    simulate->add_option("--config", sim.config, "scenario config file")->required();
    simulate->add_option("--out", sim.out, "output directory")->required();
    simulate->add_option("--seed", sim.seed, "override master seed");
    simulate->add_option("--cases", sim.cases, "override case count");
    simulate->add_option("--measurements", sim.measurements, "override measurement count");
    simulate->add_option("--threads", sim.threads, "worker threads (capped by LEAKMETER_THREADS)");

    std::string model_path;
    auto* decompose = app.add_subcommand("decompose", "natural/corrective decomposition of a model");
    decompose->add_option("--model", model_path, "model file")->required();

    std::string spec_path;
    auto* util = app.add_subcommand("utility", "weighted privacy utility over property models");
    util->add_option("--spec", spec_path, "utility spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*simulate) return cmd_simulate(sim);
    if (*decompose) return cmd_decompose(model_path);
    return cmd_utility(spec_path);
}
