#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace aqm2d {

// Continuous 2D state-space model with one delay per axis:
//   [dx^h/dt1; dx^v/dt2] = A x + A_tau x_d + B u + B_tau u_d
// where x = [x^h; x^v], x_d = [x^h(t1 - tau1, t2); x^v(t1, t2 - tau2)] and
// u_d is the input delayed the same way.
//
// For the TCP/AQM model: x = [dW^h, dq^h | dW^v, dq^v] (deviations from the
// operating point), u = [dp^h; dp^v], n_h = n_v = 2, m = 2.
struct StateSpace2D {
    int n_h = 2;
    int n_v = 2;
    Eigen::MatrixXd A;      // (n_h+n_v) x (n_h+n_v)
    Eigen::MatrixXd A_tau;  // (n_h+n_v) x (n_h+n_v)
    Eigen::MatrixXd B;      // (n_h+n_v) x m
    Eigen::MatrixXd B_tau;  // (n_h+n_v) x m
    double tau1 = 0.0;
    double tau2 = 0.0;

    int n() const { return n_h + n_v; }
    int m() const { return static_cast<int>(B.cols()); }

    void check() const {
        if (n_h <= 0 || n_v <= 0)
            throw std::invalid_argument("StateSpace2D: block dims must be positive");
        if (A.rows() != n() || A.cols() != n() || A_tau.rows() != n() || A_tau.cols() != n())
            throw std::invalid_argument("StateSpace2D: A/A_tau must be n x n");
        if (B.rows() != n() || B_tau.rows() != n() || B.cols() != B_tau.cols())
            throw std::invalid_argument("StateSpace2D: B/B_tau shape mismatch");
        if (!(tau1 > 0.0) || !(tau2 > 0.0))
            throw std::invalid_argument("StateSpace2D: delays must be positive");
    }

    // Closed loop under u = K x: A + B K and A_tau + B_tau K.
    StateSpace2D closed_loop(const Eigen::MatrixXd& K) const {
        StateSpace2D cl = *this;
        cl.A = A + B * K;
        cl.A_tau = A_tau + B_tau * K;
        cl.B.setZero();
        cl.B_tau.setZero();
        return cl;
    }
};

}  // namespace aqm2d
