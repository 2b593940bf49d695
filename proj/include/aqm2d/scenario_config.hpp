#pragma once

// Versioned JSON configuration for the CLI pipeline. Strict parsing: unknown
// keys are rejected at every level so golden configs cannot silently rot.
//
// Layout (version 1):
// {
//   "version": 1,
//   "params": { "n_flows", "lambda",
//               "capacity_pkts_per_s" | ("capacity_bits_per_s" + "packet_bits"),
//               "t_prop", "q_ref", "scenario": "A"|"B", "ecn": "on"|"off" },
//   "equilibrium_override": { "w", "p", ["tau1"], ["tau2"] },        (optional)
//   "system": { "A", "A_tau", "B", "B_tau", "tau1", "tau2" },        (optional)
//   "grid": { "h1", "h2", "m1", "m2" },                              (optional)
//   "boundary": { "x0_h", "x0_v", ["t1_support"], ["t2_support"] },  (optional)
//   "tolerances": { "rel", "abs" },                                  (optional)
//   "out_dir": "path"                                                (optional)
// }
// An explicit "system" block bypasses the equilibrium/linearization pipeline
// (used by the self-test configuration with a known stable system).

#include <Eigen/Dense>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "network_params.hpp"
#include "sim2d.hpp"
#include "state_space.hpp"

namespace aqm2d {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct EquilibriumOverride {
    double w = 0.0;
    double p = 0.0;
    std::optional<double> tau1, tau2;
};

struct GridConfig {
    double h1 = 0.0, h2 = 0.0;
    int m1 = 0, m2 = 0;
};

struct ToleranceConfig {
    double rel = 0.01;
    double abs = 0.02;
};

struct ScenarioConfig {
    NetworkParams params;
    std::optional<EquilibriumOverride> override;
    std::optional<StateSpace2D> system;
    std::optional<GridConfig> grid;
    BoundaryData boundary;
    ToleranceConfig tolerances;
    std::string out_dir;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) { ok = true; break; }
        if (!ok)
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double require_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key))
        throw ConfigError("missing \"" + std::string(key) + "\" in " + where);
    if (!obj[key].is_number())
        throw ConfigError("\"" + std::string(key) + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

inline Eigen::MatrixXd parse_matrix(const json& arr, const std::string& where,
                                    int rows, int cols) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != rows)
        throw ConfigError(where + " must be a " + std::to_string(rows) + "-row array");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = arr[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(where + " rows must have " + std::to_string(cols) + " entries");
        for (int j = 0; j < cols; ++j) {
            if (!row[j].is_number())
                throw ConfigError(where + " entries must be numbers");
            m(i, j) = row[j].get<double>();
        }
    }
    return m;
}

inline Eigen::Vector2d parse_vec2(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() != 2)
        throw ConfigError(where + " must be a 2-element array");
    for (int i = 0; i < 2; ++i)
        if (!arr[i].is_number())
            throw ConfigError(where + " entries must be numbers");
    return {arr[0].get<double>(), arr[1].get<double>()};
}

inline NetworkParams parse_params(const json& p) {
    reject_unknown(p, "params",
                   {"n_flows", "lambda", "capacity_pkts_per_s", "capacity_bits_per_s",
                    "packet_bits", "t_prop", "q_ref", "scenario", "ecn"});
    NetworkParams out;
    out.n_flows = require_number(p, "params", "n_flows");
    out.lambda = require_number(p, "params", "lambda");
    if (p.contains("capacity_pkts_per_s") == p.contains("capacity_bits_per_s"))
        throw ConfigError(
            "params needs exactly one of capacity_pkts_per_s / capacity_bits_per_s");
    if (p.contains("packet_bits")) out.packet_bits = require_number(p, "params", "packet_bits");
    if (p.contains("capacity_pkts_per_s"))
        out.capacity = require_number(p, "params", "capacity_pkts_per_s");
    else
        out.capacity = require_number(p, "params", "capacity_bits_per_s") / out.packet_bits;
    out.t_prop = require_number(p, "params", "t_prop");
    out.q_ref = require_number(p, "params", "q_ref");

    if (!p.contains("scenario") || !p["scenario"].is_string())
        throw ConfigError("params.scenario must be \"A\" or \"B\"");
    const std::string sc = p["scenario"].get<std::string>();
    if (sc == "A") out.scenario = Scenario::A;
    else if (sc == "B") out.scenario = Scenario::B;
    else throw ConfigError("params.scenario must be \"A\" or \"B\"");

    if (!p.contains("ecn") || !p["ecn"].is_string())
        throw ConfigError("params.ecn must be \"on\" or \"off\"");
    const std::string ecn = p["ecn"].get<std::string>();
    if (ecn == "on") out.ecn = Ecn::On;
    else if (ecn == "off") out.ecn = Ecn::Off;
    else throw ConfigError("params.ecn must be \"on\" or \"off\"");

    try {
        out.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    return out;
}

inline StateSpace2D parse_system(const json& s) {
    reject_unknown(s, "system", {"A", "A_tau", "B", "B_tau", "tau1", "tau2"});
    StateSpace2D ss;
    ss.n_h = ss.n_v = 2;
    for (const char* key : {"A", "A_tau", "B", "B_tau"})
        if (!s.contains(key))
            throw ConfigError(std::string("system missing \"") + key + "\"");
    ss.A = parse_matrix(s["A"], "system.A", 4, 4);
    ss.A_tau = parse_matrix(s["A_tau"], "system.A_tau", 4, 4);
    ss.B = parse_matrix(s["B"], "system.B", 4, 2);
    ss.B_tau = parse_matrix(s["B_tau"], "system.B_tau", 4, 2);
    ss.tau1 = require_number(s, "system", "tau1");
    ss.tau2 = require_number(s, "system", "tau2");
    try {
        ss.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
    return ss;
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& root) {
    using detail::require_number;
    detail::reject_unknown(root, "config",
                           {"version", "params", "equilibrium_override", "system", "grid",
                            "boundary", "tolerances", "out_dir"});
    if (!root.contains("version") || !root["version"].is_number_integer() ||
        root["version"].get<int>() != 1)
        throw ConfigError("config requires \"version\": 1");
    if (!root.contains("params"))
        throw ConfigError("config requires a \"params\" block");

    ScenarioConfig cfg;
    cfg.params = detail::parse_params(root["params"]);

    if (root.contains("equilibrium_override")) {
        const auto& o = root["equilibrium_override"];
        detail::reject_unknown(o, "equilibrium_override", {"w", "p", "tau1", "tau2"});
        EquilibriumOverride ov;
        ov.w = require_number(o, "equilibrium_override", "w");
        ov.p = require_number(o, "equilibrium_override", "p");
        if (o.contains("tau1")) ov.tau1 = require_number(o, "equilibrium_override", "tau1");
        if (o.contains("tau2")) ov.tau2 = require_number(o, "equilibrium_override", "tau2");
        if (!(ov.w > 0.0) || !(ov.p >= 0.0) || !(ov.p <= 1.0))
            throw ConfigError("equilibrium_override requires w > 0 and p in [0, 1]");
        cfg.override = ov;
    }

    if (root.contains("system")) cfg.system = detail::parse_system(root["system"]);

    if (root.contains("grid")) {
        const auto& g = root["grid"];
        detail::reject_unknown(g, "grid", {"h1", "h2", "m1", "m2"});
        GridConfig gc;
        gc.h1 = require_number(g, "grid", "h1");
        gc.h2 = require_number(g, "grid", "h2");
        gc.m1 = static_cast<int>(require_number(g, "grid", "m1"));
        gc.m2 = static_cast<int>(require_number(g, "grid", "m2"));
        if (!(gc.h1 > 0.0) || !(gc.h2 > 0.0) || gc.m1 < 1 || gc.m2 < 1)
            throw ConfigError("grid requires positive steps and m1, m2 >= 1");
        cfg.grid = gc;
    }

    if (root.contains("boundary")) {
        const auto& b = root["boundary"];
        detail::reject_unknown(b, "boundary", {"x0_h", "x0_v", "t1_support", "t2_support"});
        if (!b.contains("x0_h") || !b.contains("x0_v"))
            throw ConfigError("boundary requires x0_h and x0_v");
        cfg.boundary.x0_h = detail::parse_vec2(b["x0_h"], "boundary.x0_h");
        cfg.boundary.x0_v = detail::parse_vec2(b["x0_v"], "boundary.x0_v");
        if (b.contains("t1_support"))
            cfg.boundary.t1_support = require_number(b, "boundary", "t1_support");
        if (b.contains("t2_support"))
            cfg.boundary.t2_support = require_number(b, "boundary", "t2_support");
    }

    if (root.contains("tolerances")) {
        const auto& t = root["tolerances"];
        detail::reject_unknown(t, "tolerances", {"rel", "abs"});
        cfg.tolerances.rel = require_number(t, "tolerances", "rel");
        cfg.tolerances.abs = require_number(t, "tolerances", "abs");
        if (cfg.tolerances.rel < 0.0 || cfg.tolerances.abs < 0.0)
            throw ConfigError("tolerances must be nonnegative");
    }

    if (root.contains("out_dir")) {
        if (!root["out_dir"].is_string())
            throw ConfigError("out_dir must be a string");
        cfg.out_dir = root["out_dir"].get<std::string>();
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config root must be a JSON object");
    return parse_config(root);
}

}  // namespace aqm2d
