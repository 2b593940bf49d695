#pragma once

// Interior-point solver for the margin-maximization form of a semidefinite
// feasibility problem:
//
//   maximize t  s.t.  F0_j + sum_i x_i F_ij - t I >= 0   (block j)
//                     |x|^2 <= rho^2
//
// Log-barrier path following with damped Newton steps. Iterates stay
// strictly inside the cone (Cholesky-checked line search), so any returned
// assignment is feasible for the margin it reports; no trust is placed in
// convergence claims alone. The norm ball makes the homogeneous problems
// bounded; for those, t* > 0 iff a strictly feasible point exists.

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace aqm2d {

struct SdpBlock {
    Eigen::MatrixXd F0;               // constant term (often zero)
    std::vector<Eigen::MatrixXd> F;   // one matrix per decision variable
};

struct SdpProblem {
    int nvar = 0;
    std::vector<SdpBlock> blocks;
    double rho = 1.0;  // radius of the normalization ball

    void check() const {
        for (const auto& blk : blocks) {
            if (static_cast<int>(blk.F.size()) != nvar)
                throw std::invalid_argument("SdpProblem: block has wrong variable count");
            for (const auto& f : blk.F)
                if (f.rows() != blk.F0.rows() || f.cols() != blk.F0.cols())
                    throw std::invalid_argument("SdpProblem: matrix size mismatch");
        }
    }
};

struct SdpSolution {
    Eigen::VectorXd x;
    double t = 0.0;          // attained margin
    bool converged = false;  // barrier loop ran to its final stage
};

struct SdpSettings {
    double mu_initial = 1.0;
    double mu_final = 1e-10;
    double mu_shrink = 0.2;
    double newton_tol = 1e-9;
    int max_newton = 200;
    bool trace = false;  // log per-stage progress to stderr
};

namespace detail {

inline bool cholesky(const Eigen::MatrixXd& s, Eigen::LLT<Eigen::MatrixXd>* out = nullptr) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return false;
    if (out) *out = llt;
    return true;
}

inline Eigen::MatrixXd block_value(const SdpBlock& blk, const Eigen::VectorXd& x, double t) {
    Eigen::MatrixXd s = blk.F0;
    for (int i = 0; i < x.size(); ++i)
        if (x(i) != 0.0) s += x(i) * blk.F[i];
    s.diagonal().array() -= t;
    return s;
}

inline bool inside_cone(const SdpProblem& prob, const Eigen::VectorXd& x, double t) {
    if (x.squaredNorm() >= prob.rho * prob.rho) return false;
    for (const auto& blk : prob.blocks)
        if (!cholesky(block_value(blk, x, t))) return false;
    return true;
}

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& prob, const SdpSettings& settings = {}) {
    prob.check();
    const int nv = prob.nvar;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
    double t = 0.0;
    for (const auto& blk : prob.blocks) {
        const double lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(blk.F0)
                               .eigenvalues().minCoeff();
        t = std::min(t, lam);
    }
    t -= 1.0;  // strictly feasible start

    SdpSolution sol;
    for (double mu = settings.mu_initial; mu > settings.mu_final; mu *= settings.mu_shrink) {
        for (int it = 0; it < settings.max_newton; ++it) {
            // Gradient and Hessian of -t - mu [sum log det S_j + log(rho^2 - x'x)].
            Eigen::VectorXd g = Eigen::VectorXd::Zero(nv + 1);
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv + 1, nv + 1);
            g(nv) = -1.0;

            for (const auto& blk : prob.blocks) {
                Eigen::LLT<Eigen::MatrixXd> llt;
                if (!detail::cholesky(detail::block_value(blk, x, t), &llt))
                    throw std::runtime_error("solve_sdp: iterate left the cone");
                const int m = static_cast<int>(blk.F0.rows());
                const Eigen::MatrixXd sinv =
                    llt.solve(Eigen::MatrixXd::Identity(m, m));

                std::vector<Eigen::MatrixXd> gmat(nv);
                for (int i = 0; i < nv; ++i) {
                    gmat[i] = sinv * blk.F[i];
                    g(i) += -mu * gmat[i].trace();
                    h(i, nv) += -mu * (gmat[i] * sinv).trace();
                }
                g(nv) += mu * sinv.trace();
                for (int i = 0; i < nv; ++i)
                    for (int k = i; k < nv; ++k) {
                        const double v =
                            mu * gmat[i].cwiseProduct(gmat[k].transpose()).sum();
                        h(i, k) += v;
                        if (k != i) h(k, i) += v;
                    }
                h(nv, nv) += mu * (sinv * sinv).trace();
            }
            h.row(nv).head(nv) = h.col(nv).head(nv).transpose();

            const double ball = prob.rho * prob.rho - x.squaredNorm();
            g.head(nv) += (2.0 * mu / ball) * x;
            h.topLeftCorner(nv, nv) +=
                (2.0 * mu / ball) * Eigen::MatrixXd::Identity(nv, nv) +
                (4.0 * mu / (ball * ball)) * (x * x.transpose());

            Eigen::VectorXd d = h.ldlt().solve(-g);
            if (!d.allFinite())
                d = h.fullPivLu().solve(-g);
            const double decrement = -g.dot(d);

            double step = 1.0;
            bool moved = false;
            for (int half = 0; half < 60; ++half) {
                if (detail::inside_cone(prob, x + step * d.head(nv), t + step * d(nv))) {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
            x += step * d.head(nv);
            t += step * d(nv);
            if (decrement < settings.newton_tol) break;
        }
        if (settings.trace)
            std::cerr << "solve_sdp: mu=" << mu << " t=" << t << '\n';
        sol.converged = true;
    }

    sol.x = x;
    sol.t = t;
    return sol;
}

}  // namespace aqm2d
