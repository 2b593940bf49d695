#pragma once

// JSON (de)serialization for the artifact types the CLI emits: operating
// points, state-space models, feedback gains, verdicts and certificates.
// Round-trip fidelity (load(dump(x)) == x) is part of the contract.

#include <Eigen/Dense>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "equilibrium.hpp"
#include "lmi.hpp"
#include "state_space.hpp"

namespace aqm2d {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.empty() || !arr[0].is_array())
        throw std::invalid_argument("matrix_from_json: expected array of arrays");
    const int rows = static_cast<int>(arr.size());
    const int cols = static_cast<int>(arr[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(arr[i].size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (int j = 0; j < cols; ++j) m(i, j) = arr[i][j].get<double>();
    }
    return m;
}

inline nlohmann::json to_json(const EquilibriumPoint& eq) {
    return {{"w_h", eq.w_h}, {"w_v", eq.w_v}, {"p", eq.p},   {"q_h", eq.q_h},
            {"q_v", eq.q_v}, {"tau1", eq.tau1}, {"tau2", eq.tau2}};
}

inline EquilibriumPoint equilibrium_from_json(const nlohmann::json& j) {
    EquilibriumPoint eq;
    eq.w_h = j.at("w_h").get<double>();
    eq.w_v = j.at("w_v").get<double>();
    eq.p = j.at("p").get<double>();
    eq.q_h = j.at("q_h").get<double>();
    eq.q_v = j.at("q_v").get<double>();
    eq.tau1 = j.at("tau1").get<double>();
    eq.tau2 = j.at("tau2").get<double>();
    return eq;
}

inline nlohmann::json to_json(const StateSpace2D& ss) {
    return {{"n_h", ss.n_h},       {"n_v", ss.n_v},
            {"A", matrix_to_json(ss.A)},     {"A_tau", matrix_to_json(ss.A_tau)},
            {"B", matrix_to_json(ss.B)},     {"B_tau", matrix_to_json(ss.B_tau)},
            {"tau1", ss.tau1},     {"tau2", ss.tau2}};
}

inline StateSpace2D state_space_from_json(const nlohmann::json& j) {
    StateSpace2D ss;
    ss.n_h = j.at("n_h").get<int>();
    ss.n_v = j.at("n_v").get<int>();
    ss.A = matrix_from_json(j.at("A"));
    ss.A_tau = matrix_from_json(j.at("A_tau"));
    ss.B = matrix_from_json(j.at("B"));
    ss.B_tau = matrix_from_json(j.at("B_tau"));
    ss.tau1 = j.at("tau1").get<double>();
    ss.tau2 = j.at("tau2").get<double>();
    return ss;
}

inline nlohmann::json gain_to_json(const Eigen::MatrixXd& k) {
    return {{"K", matrix_to_json(k)}};
}

inline Eigen::MatrixXd gain_from_json(const nlohmann::json& j) {
    return matrix_from_json(j.at("K"));
}

inline std::string to_string(LmiStatus s) {
    switch (s) {
        case LmiStatus::Feasible: return "Feasible";
        case LmiStatus::Infeasible: return "Infeasible";
        default: return "SolverUnknown";
    }
}

inline nlohmann::json to_json(const StabilityVerdict& v) {
    return {{"status", to_string(v.status)},
            {"margin", v.margin},
            {"attained_t", v.attained_t},
            {"diagnostics", v.diagnostics}};
}

// Certificate: the verdict plus the full variable assignment that witnesses
// feasibility (empty matrices when the verdict is not Feasible).
inline nlohmann::json certificate_to_json(const StabilityVerdict& v) {
    nlohmann::json j = to_json(v);
    if (v.status == LmiStatus::Feasible) {
        j["variables"] = {{"Ph", matrix_to_json(v.assignment.Ph)},
                          {"Pv", matrix_to_json(v.assignment.Pv)},
                          {"Qh", matrix_to_json(v.assignment.Qh)},
                          {"Qv", matrix_to_json(v.assignment.Qv)},
                          {"Rh", matrix_to_json(v.assignment.Rh)},
                          {"Rv", matrix_to_json(v.assignment.Rv)},
                          {"Hh", matrix_to_json(v.assignment.Hh)},
                          {"Hv", matrix_to_json(v.assignment.Hv)}};
        if (v.assignment.V.size() > 0)
            j["variables"]["V"] = matrix_to_json(v.assignment.V);
    }
    return j;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace aqm2d
