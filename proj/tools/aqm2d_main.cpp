// Command-line front end: scenario config -> equilibrium -> linearization ->
// analysis / synthesis -> simulation -> reports.
//
// Exit codes: 0 ok, 1 config error, 2 equilibrium failure, 3 solver unknown,
// 4 gain extraction failure. A divergent simulation is a result, not an
// error (exit 0 with the divergence flagged in the summary).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqm2d/equilibrium.hpp"
#include "aqm2d/json_io.hpp"
#include "aqm2d/linearize.hpp"
#include "aqm2d/lmi.hpp"
#include "aqm2d/reference_data.hpp"
#include "aqm2d/scenario_config.hpp"
#include "aqm2d/sim2d.hpp"

namespace {

using namespace aqm2d;
namespace fs = std::filesystem;

struct ExitCode {
    static constexpr int Ok = 0;
    static constexpr int Config = 1;
    static constexpr int Equilibrium = 2;
    static constexpr int SolverUnknown = 3;
    static constexpr int GainExtraction = 4;
};

EquilibriumPoint pipeline_equilibrium(const ScenarioConfig& cfg) {
    if (cfg.override)
        return override_equilibrium(cfg.params, cfg.override->w, cfg.override->p,
                                    cfg.override->tau1, cfg.override->tau2);
    return solve_equilibrium(cfg.params);
}

StateSpace2D pipeline_system(const ScenarioConfig& cfg) {
    if (cfg.system) return *cfg.system;
    return jacobians(pipeline_equilibrium(cfg), cfg.params);
}

std::optional<Eigen::MatrixXd> resolve_gain(const std::string& spec) {
    if (spec.empty() || spec == "none") return std::nullopt;
    if (spec == "paper-KA") return reference::gain_ka();
    if (spec == "paper-KB") return reference::gain_kb();
    return gain_from_json(load_json_file(spec));
}

std::string resolve_out_dir(const ScenarioConfig& cfg, const std::string& cli_out) {
    std::string dir = !cli_out.empty() ? cli_out : cfg.out_dir;
    if (!dir.empty()) fs::create_directories(dir);
    return dir;
}

GridSpec pipeline_grid(const ScenarioConfig& cfg, const StateSpace2D& ss) {
    if (cfg.grid)
        return GridSpec::make(ss.tau1, ss.tau2, cfg.grid->h1, cfg.grid->h2, cfg.grid->m1,
                              cfg.grid->m2);
    // Default: 20 samples per delay, horizon of 20 delays per axis.
    return GridSpec::make(ss.tau1, ss.tau2, ss.tau1 / 20.0, ss.tau2 / 20.0, 400, 400);
}

LmiOptions lmi_options() {
    LmiOptions opt;
    opt.balance = LmiOptions::default_balance_4state();
    return opt;
}

int cmd_equilibrium(const ScenarioConfig& cfg, const std::string& out_dir) {
    const EquilibriumPoint eq = pipeline_equilibrium(cfg);
    nlohmann::json j = to_json(eq);
    j["residual"] = residual(eq, cfg.params);
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty()) write_json_file(out_dir + "/equilibrium.json", j);
    return ExitCode::Ok;
}

int cmd_linearize(const ScenarioConfig& cfg, const std::string& out_dir) {
    const StateSpace2D ss = pipeline_system(cfg);
    const nlohmann::json j = to_json(ss);
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty()) write_json_file(out_dir + "/linearization.json", j);
    return ExitCode::Ok;
}

int cmd_analyze(const ScenarioConfig& cfg, const std::string& out_dir) {
    const StateSpace2D ss = pipeline_system(cfg);
    const LmiOptions opt = lmi_options();
    const LmiProblem prob = build_theorem1(ss, opt);
    const StabilityVerdict verdict = solve_lmi(prob, opt);

    nlohmann::json j;
    j["system"] = to_json(ss);
    j["verdict"] = to_json(verdict);
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty())
        write_json_file(out_dir + "/certificate.json", certificate_to_json(verdict));
    return verdict.status == LmiStatus::SolverUnknown ? ExitCode::SolverUnknown
                                                      : ExitCode::Ok;
}

int cmd_synthesize(const ScenarioConfig& cfg, const std::string& out_dir) {
    const StateSpace2D ss = pipeline_system(cfg);
    const LmiOptions opt = lmi_options();
    const LmiProblem prob = build_theorem2(ss, opt);
    const StabilityVerdict verdict = solve_lmi(prob, opt);

    nlohmann::json j;
    j["verdict"] = to_json(verdict);
    if (verdict.status == LmiStatus::SolverUnknown) {
        std::cout << j.dump(2) << std::endl;
        return ExitCode::SolverUnknown;
    }
    if (verdict.status == LmiStatus::Feasible) {
        const Eigen::MatrixXd k = extract_gain(verdict.assignment, prob.balance);
        j["K"] = matrix_to_json(k);
        j["Hh"] = matrix_to_json(verdict.assignment.Hh);
        j["Hv"] = matrix_to_json(verdict.assignment.Hv);
        j["V"] = matrix_to_json(verdict.assignment.V);
        if (!out_dir.empty()) write_json_file(out_dir + "/gain.json", gain_to_json(k));
    }
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty())
        write_json_file(out_dir + "/certificate.json", certificate_to_json(verdict));
    return ExitCode::Ok;
}

int cmd_simulate(const ScenarioConfig& cfg, const std::string& gain_spec,
                 const std::string& out_dir) {
    const StateSpace2D ss = pipeline_system(cfg);
    const std::optional<Eigen::MatrixXd> gain = resolve_gain(gain_spec);
    const GridSpec grid = pipeline_grid(cfg, ss);

    const Trajectory2D traj = simulate_linear(ss, gain, cfg.boundary, grid);
    const std::vector<double> s = decay_profile(traj);

    const double s0 = s.empty() ? 0.0 : s.front();
    const std::size_t k80 = static_cast<std::size_t>(0.8 * (grid.m1 + grid.m2));
    double s_tail = 0.0;
    for (std::size_t k = k80; k < s.size(); ++k) s_tail = std::max(s_tail, s[k]);
    const double ratio = s0 > 0.0 ? s_tail / s0 : 0.0;

    nlohmann::json summary;
    summary["divergent"] = traj.diverged;
    if (traj.diverged) summary["first_overflow"] = {traj.div_i, traj.div_j};
    summary["s0"] = s0;
    summary["s_tail"] = s_tail;
    summary["tail_ratio"] = ratio;
    summary["verdict"] =
        traj.diverged ? "divergent" : (ratio <= 1e-3 ? "decaying" : "bounded");
    std::cout << summary.dump(2) << std::endl;

    if (!out_dir.empty()) {
        write_json_file(out_dir + "/summary.json", summary);
        // Stride keeps the trajectory file near or below ~250k rows.
        const long cells = static_cast<long>(grid.m1 + 1) * (grid.m2 + 1);
        int stride = 1;
        while (cells / (static_cast<long>(stride) * stride) > 250000) ++stride;
        std::ofstream tcsv(out_dir + "/trajectory.csv");
        write_trajectory_csv(traj, tcsv, stride);
        std::ofstream dcsv(out_dir + "/decay.csv");
        write_decay_csv(s, dcsv);
    }
    return ExitCode::Ok;
}

int cmd_verify_lemma(const std::string& out_dir) {
    // Random polynomial trajectories of degree <= 5 on random intervals:
    // the derivative energy must dominate the projection bound, the bound
    // must tighten with the order, and order 0 is exact for affine x.
    std::mt19937 rng(20260823u);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> len(0.05, 3.0);
    std::uniform_real_distribution<double> start(-2.0, 2.0);

    const int trials = 1000;
    double worst_gap = 0.0, worst_order = 0.0, worst_affine = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double a = start(rng), b = a + len(rng);
        Eigen::Matrix2d z = Eigen::Matrix2d::Zero();
        z(0, 0) = 0.5 + std::abs(coef(rng));
        z(1, 1) = 0.5 + std::abs(coef(rng));
        z(0, 1) = z(1, 0) = 0.3 * coef(rng);
        Eigen::Matrix<double, 2, 6> c;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 6; ++j) c(i, j) = coef(rng);

        auto x = [&](double u) -> Eigen::VectorXd {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
            double pw = 1.0;
            for (int j = 0; j < 6; ++j, pw *= u) v += pw * c.col(j);
            return v;
        };
        auto xdot = [&](double u) -> Eigen::VectorXd {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
            double pw = 1.0;
            for (int j = 1; j < 6; ++j, pw *= u) v += j * pw * c.col(j);
            return v;
        };

        const double lhs = derivative_energy(xdot, a, b, z);
        double prev = -1.0;
        for (int order = 0; order <= 2; ++order) {
            const double bound = bl_lower_bound(x, a, b, z, order);
            worst_gap = std::max(worst_gap, bound - lhs);
            if (order > 0) worst_order = std::max(worst_order, prev - bound);
            prev = bound;
        }
        // Affine restriction: keep only the first two coefficient columns.
        auto xa = [&](double u) -> Eigen::VectorXd { return c.col(0) + u * c.col(1); };
        auto xad = [&](double) -> Eigen::VectorXd { return c.col(1); };
        const double la = derivative_energy(xad, a, b, z);
        worst_affine =
            std::max(worst_affine, std::abs(la - bl_lower_bound(xa, a, b, z, 0)));
    }

    nlohmann::json j;
    j["trials"] = trials;
    j["max_bound_minus_lhs"] = worst_gap;
    j["max_order_regression"] = worst_order;
    j["max_affine_gap"] = worst_affine;
    j["pass"] = worst_gap <= 1e-10 && worst_order <= 1e-10 && worst_affine <= 1e-10;
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty()) write_json_file(out_dir + "/lemma_report.json", j);
    return ExitCode::Ok;
}

int cmd_diff_report(const ScenarioConfig& cfg, const std::string& out_dir) {
    const StateSpace2D computed = pipeline_system(cfg);
    const StateSpace2D printed = cfg.params.scenario == Scenario::A
                                     ? reference::scenario_a_matrices()
                                     : reference::scenario_b_matrices();
    const std::vector<DiffEntry> entries =
        diff_report(computed, printed, cfg.tolerances.rel, cfg.tolerances.abs);

    nlohmann::json j;
    j["rel_tol"] = cfg.tolerances.rel;
    j["abs_tol"] = cfg.tolerances.abs;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
        j["entries"].push_back({{"matrix", e.matrix},
                                {"row", e.row},
                                {"col", e.col},
                                {"computed", e.computed},
                                {"printed", e.printed},
                                {"symbol", e.symbol}});
    std::cout << j.dump(2) << std::endl;
    if (!out_dir.empty()) write_json_file(out_dir + "/diff_report.json", j);
    return ExitCode::Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D TCP/AQM fluid-model toolkit"};
    app.require_subcommand(1);

    std::string config_path, gain_spec, out_dir_cli;
    std::vector<CLI::App*> subs;
    for (const char* name : {"equilibrium", "linearize", "analyze", "synthesize",
                             "simulate", "verify-lemma", "diff-report"}) {
        CLI::App* sub = app.add_subcommand(name);
        if (std::string(name) != "verify-lemma")
            sub->add_option("--config", config_path, "scenario config JSON")->required();
        else
            sub->add_option("--config", config_path, "ignored for this subcommand");
        sub->add_option("--gain", gain_spec, "none | <path> | paper-KA | paper-KB");
        sub->add_option("--out", out_dir_cli, "output directory");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitCode::Config;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "verify-lemma") {
            if (!out_dir_cli.empty()) std::filesystem::create_directories(out_dir_cli);
            return cmd_verify_lemma(out_dir_cli);
        }
        const ScenarioConfig cfg = load_config(config_path);
        const std::string out_dir = resolve_out_dir(cfg, out_dir_cli);
        if (cmd == "equilibrium") return cmd_equilibrium(cfg, out_dir);
        if (cmd == "linearize") return cmd_linearize(cfg, out_dir);
        if (cmd == "analyze") return cmd_analyze(cfg, out_dir);
        if (cmd == "synthesize") return cmd_synthesize(cfg, out_dir);
        if (cmd == "simulate") return cmd_simulate(cfg, gain_spec, out_dir);
        if (cmd == "diff-report") return cmd_diff_report(cfg, out_dir);
        std::cerr << "unknown subcommand: " << cmd << '\n';
        return ExitCode::Config;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ExitCode::Config;
    } catch (const EquilibriumError& e) {
        std::cerr << "equilibrium failure: " << e.what() << '\n';
        return ExitCode::Equilibrium;
    } catch (const GainExtractionError& e) {
        std::cerr << "gain extraction failure: " << e.what()
                  << " (cond = " << e.condition << ")\n";
        return ExitCode::GainExtraction;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::Config;
    }
}
