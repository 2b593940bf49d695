#pragma once

// Steady state of the 2D fluid model.
//
// The queue is pinned at the AQM reference (q^h = q^v = q_ref), which fixes
// the delays tau_i = q_i/C + Tp. The queue rate balance then determines the
// windows and the window balance determines the probability:
//   ECN on:   N W / tau = C          =>  W = tau C / N
//   ECN off:  N W (1 - p) / tau = C  =>  W = tau C / (N (1 - p))
//   p = 2N / (2N + lambda W)           (scenario A)
//   p = 2N^2 / (2N^2 + lambda W^2)     (scenario B)
// ECN off couples p and W; a damped fixed-point iteration resolves it.
//
// Known model defect, surfaced by residual(): in scenario B the vertical
// window equation demands p = 2N^2 / (2N^2 + lambda W), which is
// incompatible with the horizontal equation above for W != 1. No choice of
// (W, p) zeroes all four right-hand sides, so scenario B equilibria carry an
// irreducible residual on the vertical window component.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "fluid_model.hpp"
#include "network_params.hpp"

namespace aqm2d {

struct EquilibriumPoint {
    double w_h = 0.0;
    double w_v = 0.0;
    double p = 0.0;    // steady state has p^h = p^v
    double q_h = 0.0;
    double q_v = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

class EquilibriumError : public std::runtime_error {
  public:
    EquilibriumError(const std::string& msg, double last_residual = 0.0)
        : std::runtime_error(msg), last_residual(last_residual) {}
    double last_residual;
};

// Window-balance probability for the horizontal equation.
inline double window_balance_p(double w, const NetworkParams& params) {
    const double n = params.n_flows;
    if (params.scenario == Scenario::A)
        return 2.0 * n / (2.0 * n + params.lambda * w);
    return 2.0 * n * n / (2.0 * n * n + params.lambda * w * w);
}

inline EquilibriumPoint solve_equilibrium(const NetworkParams& params) {
    params.validate();
    const double tau = round_trip_time(params.q_ref, params);
    if (!(tau > 0.0))
        throw EquilibriumError("degenerate equilibrium: tau = 0 (q_ref and t_prop both zero)");

    EquilibriumPoint eq;
    eq.q_h = eq.q_v = params.q_ref;
    eq.tau1 = eq.tau2 = tau;

    const double n = params.n_flows;
    if (params.ecn == Ecn::On) {
        eq.w_h = tau * params.capacity / n;
        eq.w_v = eq.w_h;  // tau1 = tau2 when both queues sit at q_ref
        eq.p = window_balance_p(eq.w_h, params);
        return eq;
    }

    // ECN off: p and W are coupled. Damped fixed point on p; the map is a
    // mild contraction on (0, 1) and damping keeps it that way everywhere.
    // Once inside the 1e-12 band the loop keeps going until the update
    // stalls, because the queue residual amplifies p-error by C/(1 - p).
    const double damping = 0.5;
    const int max_iter = 10000;
    double p = 0.5;
    double res = 0.0;
    bool converged = false;
    for (int i = 0; i < max_iter; ++i) {
        const double w = tau * params.capacity / (n * (1.0 - p));
        const double target = window_balance_p(w, params);
        const double prev = res;
        res = std::abs(p - target);
        if (res <= 1e-12) {
            converged = true;
            if (res == 0.0 || (i > 0 && res >= prev))
                break;
        }
        p = (1.0 - damping) * p + damping * target;
    }
    if (!converged)
        throw EquilibriumError("equilibrium fixed point did not converge", res);
    // Recomputing W from the final p makes the queue balance exact by
    // construction; the leftover window residual is O(machine eps * W/tau).
    eq.w_h = eq.w_v = tau * params.capacity / (n * (1.0 - p));
    eq.p = p;
    return eq;
}

// Accept a reported operating point verbatim. Optional delay overrides keep
// the invariant tau_i = q_i/C + Tp by back-solving the queue levels.
inline EquilibriumPoint override_equilibrium(const NetworkParams& params, double w, double p,
                                             std::optional<double> tau1 = std::nullopt,
                                             std::optional<double> tau2 = std::nullopt) {
    params.validate();
    EquilibriumPoint eq;
    eq.w_h = eq.w_v = w;
    eq.p = p;
    eq.tau1 = tau1.value_or(round_trip_time(params.q_ref, params));
    eq.tau2 = tau2.value_or(round_trip_time(params.q_ref, params));
    if (!(eq.tau1 > 0.0) || !(eq.tau2 > 0.0))
        throw EquilibriumError("degenerate override: tau = 0");
    eq.q_h = (eq.tau1 - params.t_prop) * params.capacity;
    eq.q_v = (eq.tau2 - params.t_prop) * params.capacity;
    return eq;
}

inline ModelPoint model_point_at(const EquilibriumPoint& eq) {
    ModelPoint pt;
    pt.w_h = pt.w_h_del = eq.w_h;
    pt.w_v = eq.w_v;
    pt.q_h = pt.q_h_del = eq.q_h;
    pt.q_v = eq.q_v;
    pt.p_v = pt.p_v_del = eq.p;
    pt.tau2 = eq.tau2;
    return pt;
}

// Largest right-hand-side magnitude at eq with all delayed values set to the
// current values. Zero (up to round-off) exactly when eq is a true root.
inline double residual(const EquilibriumPoint& eq, const NetworkParams& params) {
    const Derivative4 d = rhs_all(model_point_at(eq), params);
    return std::max(std::max(std::abs(d.dwh_dt1), std::abs(d.dqh_dt1)),
                    std::max(std::abs(d.dwv_dt2), std::abs(d.dqv_dt2)));
}

}  // namespace aqm2d
