#pragma once

// Roesser linearization of the fluid model around an operating point.
//
// State ordering [dW^h, dq^h | dW^v, dq^v], inputs [dp^h; dp^v]. Derivatives
// with respect to delayed states/inputs go to A_tau/B_tau, current ones to
// A/B. The queue coupling of the delays (tau = q/C + Tp) is differentiated
// through, which is what puts the q-columns of the window rows into play.
// dp^h never appears in a right-hand side, so its columns are zero.
//
// jacobians() is closed-form; fd_jacobians() is the central-difference
// oracle on the very same right-hand sides and is the correctness contract
// for the closed forms.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "fluid_model.hpp"
#include "state_space.hpp"

namespace aqm2d {

inline StateSpace2D jacobians(const EquilibriumPoint& eq, const NetworkParams& params) {
    const double n = params.n_flows;
    const double lam = params.lambda;
    const double cap = params.capacity;
    const double w = eq.w_h;
    const double wv = eq.w_v;
    const double p = eq.p;
    const double t1 = eq.tau1;
    const double t2 = eq.tau2;
    if (params.scenario == Scenario::B && w == 0.0)
        throw std::domain_error("jacobians: scenario B requires w_h != 0");

    StateSpace2D ss;
    ss.n_h = ss.n_v = 2;
    ss.A = Eigen::MatrixXd::Zero(4, 4);
    ss.A_tau = Eigen::MatrixXd::Zero(4, 4);
    ss.B = Eigen::MatrixXd::Zero(4, 2);
    ss.B_tau = Eigen::MatrixXd::Zero(4, 2);
    ss.tau1 = t1;
    ss.tau2 = t2;

    const bool scen_a = params.scenario == Scenario::A;
    const double keep = params.ecn == Ecn::On ? 1.0 : 1.0 - p;

    // Row 0: horizontal window. The growth term differs per scenario, the
    // loss term -lam W W_d p / (2 N tau1) is shared.
    const double loss_dw = lam * w * p / (2.0 * n * t1);  // d(loss)/dW at W_d = W
    if (scen_a) {
        ss.A(0, 0) = -loss_dw;
        ss.A_tau(0, 0) = (1.0 - p) / t1 - loss_dw;
        ss.B_tau(0, 1) = -w / t1 - lam * w * w / (2.0 * n * t1);
    } else {
        ss.A(0, 0) = -n * (1.0 - p) / (t1 * w) - loss_dw;
        ss.A_tau(0, 0) = n * (1.0 - p) / (t1 * w) - loss_dw;
        ss.B_tau(0, 1) = -n / t1 - lam * w * w / (2.0 * n * t1);
    }
    // The whole right-hand side scales with 1/tau1, so the delayed-queue
    // column is -f/(tau1 C). It vanishes only at a true root.
    const double f_wh = rhs_window_h(model_point_at(eq), params);
    ss.A_tau(0, 1) = -f_wh / (t1 * cap);

    // Row 1: horizontal queue, N W keep / tau1 - C with tau1 = q^h/C + Tp.
    ss.A(1, 0) = n * keep / t1;
    ss.A(1, 1) = -n * w * keep / (t1 * t1 * cap);
    if (params.ecn == Ecn::Off)
        ss.B_tau(1, 1) = -n * w / t1;

    // Row 2: vertical window; leading factor 1 (A) or N (B) on the growth.
    const double lead = scen_a ? 1.0 : n;
    ss.A(2, 0) = lead * (1.0 - p) / t2 - lam * w * p / (n * t2);
    const double f_wv = rhs_window_v(model_point_at(eq), params);
    ss.A(2, 3) = -f_wv / (t2 * cap);
    ss.B(2, 1) = -lead * w / t2 - lam * w * w / (2.0 * n * t2);

    // Row 3: vertical queue, N W^v keep / tau2 - C with tau2 = q^v/C + Tp.
    ss.A(3, 2) = n * keep / t2;
    ss.A(3, 3) = -n * wv * keep / (t2 * t2 * cap);
    if (params.ecn == Ecn::Off)
        ss.B(3, 1) = -n * wv / t2;

    return ss;
}

namespace detail {

// Full right-hand side as a function of (x, x_d, u, u_d), with the delay
// couplings wired in: the vertical delay follows the current vertical queue.
inline Eigen::Vector4d rhs_vector(const Eigen::Vector4d& x, const Eigen::Vector4d& xd,
                                  const Eigen::Vector2d& u, const Eigen::Vector2d& ud,
                                  const NetworkParams& params) {
    ModelPoint pt;
    pt.w_h = x(0);
    pt.q_h = x(1);
    pt.w_v = x(2);
    pt.q_v = x(3);
    pt.w_h_del = xd(0);
    pt.q_h_del = xd(1);
    pt.p_v = u(1);
    pt.p_v_del = ud(1);
    pt.tau2 = round_trip_time(pt.q_v, params);
    const Derivative4 d = rhs_all(pt, params);
    return {d.dwh_dt1, d.dqh_dt1, d.dwv_dt2, d.dqv_dt2};
}

}  // namespace detail

inline StateSpace2D fd_jacobians(const EquilibriumPoint& eq, const NetworkParams& params,
                                 double step = 1e-6) {
    if (step < 1e-8 || step > 1e-3)
        throw std::invalid_argument("fd_jacobians: step must be in [1e-8, 1e-3]");

    const Eigen::Vector4d x0(eq.w_h, eq.q_h, eq.w_v, eq.q_v);
    const Eigen::Vector2d u0(eq.p, eq.p);

    StateSpace2D ss;
    ss.n_h = ss.n_v = 2;
    ss.A = Eigen::MatrixXd::Zero(4, 4);
    ss.A_tau = Eigen::MatrixXd::Zero(4, 4);
    ss.B = Eigen::MatrixXd::Zero(4, 2);
    ss.B_tau = Eigen::MatrixXd::Zero(4, 2);
    ss.tau1 = eq.tau1;
    ss.tau2 = eq.tau2;

    auto central = [&](auto&& evaluate, bool input, int dim, Eigen::MatrixXd& out) {
        for (int j = 0; j < dim; ++j) {
            const double base = input ? u0(j) : x0(j);
            const double h = step * std::max(1.0, std::abs(base));
            out.col(j) = (evaluate(j, h) - evaluate(j, -h)) / (2.0 * h);
        }
    };

    central([&](int j, double h) {
        Eigen::Vector4d x = x0;
        x(j) += h;
        return detail::rhs_vector(x, x0, u0, u0, params);
    }, false, 4, ss.A);
    central([&](int j, double h) {
        Eigen::Vector4d xd = x0;
        xd(j) += h;
        return detail::rhs_vector(x0, xd, u0, u0, params);
    }, false, 4, ss.A_tau);
    central([&](int j, double h) {
        Eigen::Vector2d u = u0;
        u(j) += h;
        return detail::rhs_vector(x0, x0, u, u0, params);
    }, true, 2, ss.B);
    central([&](int j, double h) {
        Eigen::Vector2d ud = u0;
        ud(j) += h;
        return detail::rhs_vector(x0, x0, u0, ud, params);
    }, true, 2, ss.B_tau);

    return ss;
}

struct DiffEntry {
    std::string matrix;  // "A", "A_tau", "B", "B_tau"
    int row = 0;
    int col = 0;
    double computed = 0.0;
    double printed = 0.0;
    std::string symbol;  // derivative responsible for this position
};

namespace detail {

inline std::string derivative_symbol(const std::string& matrix, int row, int col) {
    static const std::array<const char*, 4> rows = {"f_W^h", "f_q^h", "f_W^v", "f_q^v"};
    static const std::array<const char*, 4> states = {"W^h", "q^h", "W^v", "q^v"};
    static const std::array<const char*, 2> inputs = {"p^h", "p^v"};
    const bool delayed = matrix == "A_tau" || matrix == "B_tau";
    const bool input = matrix == "B" || matrix == "B_tau";
    std::string var = input ? inputs[col] : states[col];
    if (delayed) var += "(delayed)";
    return std::string("d ") + rows[row] + " / d " + var;
}

inline void diff_matrix(const std::string& name, const Eigen::MatrixXd& computed,
                        const Eigen::MatrixXd& printed, double rel_tol, double abs_tol,
                        std::vector<DiffEntry>& out) {
    if (computed.rows() != printed.rows() || computed.cols() != printed.cols())
        throw std::invalid_argument("diff_report: dimension mismatch in " + name);
    for (int i = 0; i < computed.rows(); ++i)
        for (int j = 0; j < computed.cols(); ++j) {
            const double c = computed(i, j), p = printed(i, j);
            if (std::abs(c - p) > std::max(rel_tol * std::abs(p), abs_tol))
                out.push_back({name, i, j, c, p, derivative_symbol(name, i, j)});
        }
}

}  // namespace detail

// Entries of `computed` that differ from `printed` beyond
// max(rel_tol * |printed|, abs_tol), tagged with the derivative symbol.
inline std::vector<DiffEntry> diff_report(const StateSpace2D& computed,
                                          const StateSpace2D& printed,
                                          double rel_tol, double abs_tol) {
    std::vector<DiffEntry> out;
    detail::diff_matrix("A", computed.A, printed.A, rel_tol, abs_tol, out);
    detail::diff_matrix("A_tau", computed.A_tau, printed.A_tau, rel_tol, abs_tol, out);
    detail::diff_matrix("B", computed.B, printed.B, rel_tol, abs_tol, out);
    detail::diff_matrix("B_tau", computed.B_tau, printed.B_tau, rel_tol, abs_tol, out);
    return out;
}

}  // namespace aqm2d
