#pragma once

// Nonlinear right-hand sides of the two-dimensional TCP/AQM fluid model.
//
// The model keeps two time bases: t1 at the TCP sender (horizontal) and t2 at
// the router (vertical). Window and queue each evolve along their own axis,
// so the state is [W^h, q^h | W^v, q^v] and the control channel is the
// drop/mark probability p^v (p^h never enters a right-hand side).
//
// Delay conventions, fixed here and relied on by the linearization:
//  - horizontal window: tau1 is the RTT built from the *delayed* horizontal
//    queue (the window update reacts to the queue the acked packets met);
//  - horizontal queue: tau1 is built from the *current* horizontal queue;
//  - vertical equations: tau2 is carried in ModelPoint; callers that want the
//    queue coupling tie it to q^v via round_trip_time (the linearization and
//    the nonlinear simulator both do).

#include <cmath>
#include <stdexcept>

#include "network_params.hpp"

namespace aqm2d {

// Point at which the right-hand sides are evaluated. "del" fields are the
// state/input values one delay in the past along the relevant axis.
struct ModelPoint {
    double w_h = 0.0;      // W^h(t1, t2), packets
    double w_h_del = 0.0;  // W^h(t1 - tau1, t2)
    double w_v = 0.0;      // W^v(t1, t2)
    double q_h = 0.0;      // q^h(t1, t2), packets
    double q_h_del = 0.0;  // q^h(t1 - tau1, t2)
    double q_v = 0.0;      // q^v(t1, t2)
    double p_v = 0.0;      // p^v(t1, t2), in [0, 1]
    double p_v_del = 0.0;  // p^v(t1 - tau1, t2 - tau2)
    double tau2 = 0.0;     // vertical delay used by the vertical equations, s
};

struct Derivative4 {
    double dwh_dt1 = 0.0;
    double dqh_dt1 = 0.0;
    double dwv_dt2 = 0.0;
    double dqv_dt2 = 0.0;
};

enum class Dim { H, V };

// dW^h/dt1. Growth term per scenario, loss term common to both:
//   A: W^h_del (1 - p_del) / tau1
//   B: N W^h_del (1 - p_del) / (tau1 W^h)
//   both minus lambda W^h W^h_del p_del / (2 N tau1).
inline double rhs_window_h(const ModelPoint& pt, const NetworkParams& params) {
    const double tau1 = round_trip_time(pt.q_h_del, params);
    if (!(tau1 > 0.0))
        throw std::domain_error("rhs_window_h: tau1 is zero");
    double growth;
    if (params.scenario == Scenario::A) {
        growth = pt.w_h_del * (1.0 - pt.p_v_del) / tau1;
    } else {
        if (pt.w_h == 0.0)
            throw std::domain_error("rhs_window_h: scenario B divides by w_h");
        growth = params.n_flows * pt.w_h_del * (1.0 - pt.p_v_del) / (tau1 * pt.w_h);
    }
    const double loss = params.lambda * pt.w_h * pt.w_h_del * pt.p_v_del /
                        (2.0 * params.n_flows * tau1);
    return growth - loss;
}

// dW^v/dt2, the window motion seen from the router. Both scenarios read the
// current horizontal window and the current mark probability:
//   A:   W^h (1 - p) / tau2 - lambda (W^h)^2 p / (2 N tau2)
//   B: N W^h (1 - p) / tau2 - lambda (W^h)^2 p / (2 N tau2)
inline double rhs_window_v(const ModelPoint& pt, const NetworkParams& params) {
    if (!(pt.tau2 > 0.0))
        throw std::domain_error("rhs_window_v: tau2 is zero");
    const double lead = params.scenario == Scenario::A ? pt.w_h : params.n_flows * pt.w_h;
    const double growth = lead * (1.0 - pt.p_v) / pt.tau2;
    const double loss = params.lambda * pt.w_h * pt.w_h * pt.p_v /
                        (2.0 * params.n_flows * pt.tau2);
    return growth - loss;
}

// dq/dt along either axis: arrival rate minus service rate. With ECN on the
// router marks, so every arriving packet is enqueued (no (1 - p) factor).
// With ECN off the horizontal equation sees the delayed probability, the
// vertical one the current probability.
inline double rhs_queue(const ModelPoint& pt, const NetworkParams& params, Dim dim) {
    double tau, w, keep;
    if (dim == Dim::H) {
        tau = round_trip_time(pt.q_h, params);
        w = pt.w_h;
        keep = params.ecn == Ecn::On ? 1.0 : 1.0 - pt.p_v_del;
    } else {
        tau = pt.tau2;
        w = pt.w_v;
        keep = params.ecn == Ecn::On ? 1.0 : 1.0 - pt.p_v;
    }
    if (!(tau > 0.0))
        throw std::domain_error("rhs_queue: tau is zero");
    return params.n_flows * w * keep / tau - params.capacity;
}

// Single-time-base window dynamic the 2D model reduces to when both axes are
// identified (slow-start form, delayed probability):
//   W' = w_del (1 - p_del) / tau - lambda w w_del p_del / (2 N tau)
inline double rhs_1d(double w, double w_del, double p_del, double tau,
                     const NetworkParams& params) {
    if (!(tau > 0.0))
        throw std::domain_error("rhs_1d: tau is zero");
    return w_del * (1.0 - p_del) / tau -
           params.lambda * w * w_del * p_del / (2.0 * params.n_flows * tau);
}

inline Derivative4 rhs_all(const ModelPoint& pt, const NetworkParams& params) {
    Derivative4 d;
    d.dwh_dt1 = rhs_window_h(pt, params);
    d.dqh_dt1 = rhs_queue(pt, params, Dim::H);
    d.dwv_dt2 = rhs_window_v(pt, params);
    d.dqv_dt2 = rhs_queue(pt, params, Dim::V);
    return d;
}

}  // namespace aqm2d
