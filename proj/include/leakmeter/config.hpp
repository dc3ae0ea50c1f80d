#pragma once

// Text formats read by the command-line tool. All files are INI-style `key = value` text:
//
//   scenario config   [scenario] [key] [output] sections, every key optional
//   model file        [model] grids and theta distributions, [like_true] and optional
//                     [like_inspector] rows keyed by theta label, optional [expected]
//   utility spec      one [property:NAME] section per property with `weight` and `model`

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leakmeter/distribution.hpp"
#include "leakmeter/error.hpp"
#include "leakmeter/measures.hpp"
#include "leakmeter/scenario.hpp"

namespace leakmeter::config {

using boost::property_tree::ptree;

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, where + ": " + what);
}

inline ptree read_ini(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(path.string(), "file not found");
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(path.string() + ":" + std::to_string(e.line()), e.message());
    }
    return tree;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    T value{};
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || t.empty())
        fail(field, "cannot parse '" + t + "' as a number");
    return value;
}

template <class T>
std::vector<T> parse_list(const std::string& field, const std::string& text) {
    std::vector<T> out;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        if (!token.empty() && token.back() == ',') token.pop_back();
        if (!token.empty()) out.push_back(parse_number<T>(field, token));
    }
    if (out.empty()) fail(field, "empty list");
    return out;
}

inline void reject_unknown(const ptree& section, const std::string& name,
                           const std::set<std::string>& allowed) {
    for (const auto& [key, value] : section) {
        if (!allowed.contains(key)) fail("[" + name + "] " + key, "unknown key");
    }
}

template <class T>
std::optional<T> get(const ptree& section, const std::string& name, const std::string& key) {
    auto v = section.get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return parse_number<T>("[" + name + "] " + key, *v);
}

}  // namespace detail

struct OutputConfig {
    std::string trajectories = "trajectories.csv";
    std::string aggregates = "aggregates.csv";
    std::string manifest = "manifest.json";
};

struct RunConfig {
    ScenarioConfig scenario;
    OutputConfig output;
};

/// Parses a scenario config; throws Error(InvalidConfig) naming the offending file/field.
inline RunConfig parse_scenario(const ptree& tree, const std::string& source = "config") {
    RunConfig out;
    auto& s = out.scenario;
    for (const auto& [name, section] : tree) {
        if (name != "scenario" && name != "key" && name != "output")
            detail::fail(source, "unknown section [" + name + "]");
        if (!section.data().empty()) detail::fail(source, "key '" + name + "' outside a section");
    }
    if (auto sec = tree.get_child_optional("scenario")) {
        detail::reject_unknown(*sec, "scenario",
                               {"M", "S", "theta_lo", "theta_hi", "prior_lo", "prior_hi", "x_max",
                                "n_cases", "n_measurements", "seed", "span_fraction"});
        s.M = detail::get<double>(*sec, "scenario", "M").value_or(s.M);
        s.S = detail::get<double>(*sec, "scenario", "S").value_or(s.S);
        s.theta_lo = detail::get<Label>(*sec, "scenario", "theta_lo").value_or(s.theta_lo);
        s.theta_hi = detail::get<Label>(*sec, "scenario", "theta_hi").value_or(s.theta_hi);
        s.prior_lo = detail::get<Label>(*sec, "scenario", "prior_lo");
        s.prior_hi = detail::get<Label>(*sec, "scenario", "prior_hi");
        s.x_max = detail::get<Label>(*sec, "scenario", "x_max").value_or(s.x_max);
        s.n_cases = detail::get<std::size_t>(*sec, "scenario", "n_cases").value_or(s.n_cases);
        s.n_measurements =
            detail::get<std::size_t>(*sec, "scenario", "n_measurements").value_or(s.n_measurements);
        s.master_seed = detail::get<std::uint64_t>(*sec, "scenario", "seed").value_or(s.master_seed);
        s.span_fraction =
            detail::get<double>(*sec, "scenario", "span_fraction").value_or(s.span_fraction);
    }
    if (auto sec = tree.get_child_optional("key")) {
        detail::reject_unknown(*sec, "key", {"mu", "sigma", "y_lo", "y_hi", "mode"});
        KeyConfig k;
        k.mu = detail::get<double>(*sec, "key", "mu").value_or(k.mu);
        k.sigma = detail::get<double>(*sec, "key", "sigma").value_or(k.sigma);
        k.y_lo = detail::get<Label>(*sec, "key", "y_lo");
        k.y_hi = detail::get<Label>(*sec, "key", "y_hi");
        if (auto mode = sec->get_optional<std::string>("mode")) {
            const auto m = detail::trim(*mode);
            if (m == "per_warhead")
                k.mode = KeyMode::PerWarhead;
            else if (m == "per_measurement")
                k.mode = KeyMode::PerMeasurement;
            else
                detail::fail("[key] mode", "expected per_warhead or per_measurement, got '" + m + "'");
        }
        s.key = k;
    }
    if (auto sec = tree.get_child_optional("output")) {
        detail::reject_unknown(*sec, "output", {"trajectories", "aggregates", "manifest"});
        out.output.trajectories = detail::trim(sec->get("trajectories", out.output.trajectories));
        out.output.aggregates = detail::trim(sec->get("aggregates", out.output.aggregates));
        out.output.manifest = detail::trim(sec->get("manifest", out.output.manifest));
    }
    try {
        s.validate();
    } catch (const Error& e) {
        detail::fail(source, e.what());
    }
    return out;
}

inline RunConfig load_scenario(const std::filesystem::path& path) {
    return parse_scenario(detail::read_ini(path), path.string());
}

/// Everything needed for one natural/corrective decomposition.
struct DecompositionModel {
    DiscreteDistribution p_true_theta;
    DiscreteDistribution inspector_prior;
    LikelihoodModel like_true;
    LikelihoodModel like_inspector;
    std::map<std::string, double> expected;  // optional reference values
};

namespace detail {

inline LikelihoodModel parse_rows(const ptree& tree, const std::string& name,
                                  const std::vector<Label>& theta, const std::vector<Label>& x) {
    const auto& sec = tree.get_child(name);
    std::vector<std::vector<double>> rows;
    std::set<std::string> seen;
    for (Label t : theta) {
        const std::string key = std::to_string(t);
        auto text = sec.get_optional<std::string>(ptree::path_type(key, '\0'));
        if (!text) fail("[" + name + "] " + key, "missing likelihood row");
        auto row = parse_list<double>("[" + name + "] " + key, *text);
        if (row.size() != x.size())
            fail("[" + name + "] " + key, "row has " + std::to_string(row.size()) +
                                              " entries, x grid has " + std::to_string(x.size()));
        rows.push_back(std::move(row));
        seen.insert(key);
    }
    for (const auto& [key, value] : sec)
        if (!seen.contains(key)) fail("[" + name + "] " + key, "label not on the theta grid");
    try {
        return LikelihoodModel(theta, x, std::move(rows));
    } catch (const Error& e) {
        fail("[" + name + "]", e.what());
    }
}

}  // namespace detail

inline DecompositionModel parse_model(const ptree& tree, const std::string& source = "model") {
    auto model = tree.get_child_optional("model");
    if (!model) detail::fail(source, "missing [model] section");
    if (!tree.get_child_optional("like_true")) detail::fail(source, "missing [like_true] section");
    detail::reject_unknown(*model, "model", {"theta", "x", "p_true", "inspector_prior"});

    auto list = [&](const std::string& key) {
        auto text = model->get_optional<std::string>(key);
        if (!text) detail::fail("[model] " + key, "missing");
        return *text;
    };
    const auto theta = detail::parse_list<Label>("[model] theta", list("theta"));
    const auto x = detail::parse_list<Label>("[model] x", list("x"));
    auto dist = [&](const std::string& key) {
        auto masses = detail::parse_list<double>("[model] " + key, list(key));
        try {
            return DiscreteDistribution(theta, std::move(masses));
        } catch (const Error& e) {
            detail::fail("[model] " + key, e.what());
        }
    };
    auto p_true = dist("p_true");
    auto prior = dist("inspector_prior");
    auto like_true = detail::parse_rows(tree, "like_true", theta, x);
    auto like_inspector = tree.get_child_optional("like_inspector")
                              ? detail::parse_rows(tree, "like_inspector", theta, x)
                              : like_true;

    std::map<std::string, double> expected;
    if (auto sec = tree.get_child_optional("expected")) {
        for (const auto& [key, value] : *sec)
            expected[key] = detail::parse_number<double>("[expected] " + key, value.data());
    }
    for (const auto& [name, section] : tree) {
        if (name != "model" && name != "like_true" && name != "like_inspector" && name != "expected")
            detail::fail(source, "unknown section [" + name + "]");
    }
    return DecompositionModel{std::move(p_true), std::move(prior), std::move(like_true),
                              std::move(like_inspector), std::move(expected)};
}

inline DecompositionModel load_model(const std::filesystem::path& path) {
    return parse_model(detail::read_ini(path), path.string());
}

struct UtilityEntry {
    UtilityProperty property;
    std::filesystem::path model_path;  // resolved against the spec's directory
};

inline std::vector<UtilityEntry> load_utility_spec(const std::filesystem::path& path) {
    const auto tree = detail::read_ini(path);
    std::vector<UtilityEntry> out;
    constexpr std::string_view prefix = "property:";
    for (const auto& [name, section] : tree) {
        if (!name.starts_with(prefix))
            detail::fail(path.string(), "unknown section [" + name + "]");
        detail::reject_unknown(section, name, {"weight", "model"});
        UtilityEntry e;
        e.property.name = name.substr(prefix.size());
        if (e.property.name.empty()) detail::fail("[" + name + "]", "empty property name");
        auto w = detail::get<double>(section, name, "weight");
        if (!w) detail::fail("[" + name + "] weight", "missing");
        if (!std::isfinite(*w) || *w < 0.0)
            detail::fail("[" + name + "] weight", "must be finite and nonnegative");
        e.property.weight = *w;
        auto model = section.get_optional<std::string>("model");
        if (!model) detail::fail("[" + name + "] model", "missing");
        e.model_path = path.parent_path() / detail::trim(*model);
        out.push_back(std::move(e));
    }
    if (out.empty()) detail::fail(path.string(), "no [property:NAME] sections");
    return out;
}

}  // namespace leakmeter::config
