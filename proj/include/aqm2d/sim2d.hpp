#pragma once

// Explicit first-order marching of the linear and nonlinear 2D delay systems
// over a rectangular (t1, t2) grid.
//
// Horizontal states advance along axis 1, vertical states along axis 2:
//   x^h(i+1, j) = x^h(i, j) + h1 * f^h(x(i, j), x_d(i, j))
//   x^v(i, j+1) = x^v(i, j) + h2 * f^v(x(i, j), x_d(i, j))
// with the delayed argument x_d = [x^h(i - d1, j); x^v(i, j - d2)]. Boundary
// bands occupy i in [-d1..0] for the horizontal states and j in [-d2..0] for
// the vertical ones; delays land exactly on grid nodes (rounding asserted in
// GridSpec). Overflow is recorded as a divergence marker, not an error.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "fluid_model.hpp"
#include "state_space.hpp"

namespace aqm2d {

struct GridSpec {
    double h1 = 0.0, h2 = 0.0;  // step sizes (s)
    int m1 = 0, m2 = 0;         // interior step counts
    int d1 = 0, d2 = 0;         // delay offsets (samples)

    static GridSpec make(double tau1, double tau2, double h1, double h2, int m1, int m2) {
        if (!(h1 > 0.0) || !(h2 > 0.0))
            throw std::invalid_argument("GridSpec: step sizes must be positive");
        if (m1 < 1 || m2 < 1)
            throw std::invalid_argument("GridSpec: interior step counts must be >= 1");
        GridSpec g{h1, h2, m1, m2, 0, 0};
        g.d1 = static_cast<int>(std::lround(tau1 / h1));
        g.d2 = static_cast<int>(std::lround(tau2 / h2));
        if (g.d1 < 1 || std::abs(g.d1 * h1 - tau1) > 0.5 * h1)
            throw std::invalid_argument("GridSpec: tau1 does not land on the grid");
        if (g.d2 < 1 || std::abs(g.d2 * h2 - tau2) > 0.5 * h2)
            throw std::invalid_argument("GridSpec: tau2 does not land on the grid");
        return g;
    }
};

// Constant boundary bands: the horizontal band takes value x0_h wherever
// t2 <= t2_support, the vertical band x0_v wherever t1 <= t1_support, zero
// beyond (compact support). Defaults cover the whole opposing axis.
struct BoundaryData {
    Eigen::Vector2d x0_h = Eigen::Vector2d::Zero();
    Eigen::Vector2d x0_v = Eigen::Vector2d::Zero();
    double t2_support = std::numeric_limits<double>::infinity();
    double t1_support = std::numeric_limits<double>::infinity();

    Eigen::Vector2d band_h(double t2) const {
        return t2 <= t2_support ? x0_h : Eigen::Vector2d::Zero();
    }
    Eigen::Vector2d band_v(double t1) const {
        return t1 <= t1_support ? x0_v : Eigen::Vector2d::Zero();
    }
};

struct Trajectory2D {
    GridSpec spec;
    std::string model_kind;           // "linear" or "nonlinear"
    bool gain_applied = false;
    bool diverged = false;
    int div_i = -1, div_j = -1;       // first overflow location (grid indices)

    // Deviation state, 4 components per node, rows i in [-d1..m1],
    // columns j in [-d2..m2].
    std::vector<double> data;

    int row_count() const { return spec.m1 + spec.d1 + 1; }
    int col_count() const { return spec.m2 + spec.d2 + 1; }

    double* at(int i, int j) {
        return data.data() +
               (static_cast<std::size_t>(i + spec.d1) * col_count() + (j + spec.d2)) * 4;
    }
    const double* at(int i, int j) const {
        return data.data() +
               (static_cast<std::size_t>(i + spec.d1) * col_count() + (j + spec.d2)) * 4;
    }

    void allocate() {
        data.assign(static_cast<std::size_t>(row_count()) * col_count() * 4, 0.0);
    }
};

namespace detail {

constexpr double kDivergenceThreshold = 1e12;

// Fill the boundary bands (in deviation coordinates) and the row-0/column-0
// seam shared by both. Horizontal components own rows i <= 0 entirely;
// vertical components own columns j <= 0 on rows i >= 0 (they are marched on
// rows 0..m1 only, never read on rows i < 0).
inline void fill_boundary(Trajectory2D& traj, const BoundaryData& bdry) {
    const GridSpec& g = traj.spec;
    for (int i = -g.d1; i <= 0; ++i)
        for (int j = -g.d2; j <= g.m2; ++j) {
            double* x = traj.at(i, j);
            const Eigen::Vector2d bh = bdry.band_h(j * g.h2);
            x[0] = bh(0);
            x[1] = bh(1);
            if (j <= 0) {
                const Eigen::Vector2d bv = bdry.band_v(i * g.h1);
                x[2] = bv(0);
                x[3] = bv(1);
            }
        }
    for (int i = 1; i <= g.m1; ++i)
        for (int j = -g.d2; j <= 0; ++j) {
            double* x = traj.at(i, j);
            const Eigen::Vector2d bv = bdry.band_v(i * g.h1);
            x[2] = bv(0);
            x[3] = bv(1);
        }
}

inline bool overflowed(const double* x) {
    for (int r = 0; r < 4; ++r)
        if (!(std::abs(x[r]) <= kDivergenceThreshold)) return true;
    return false;
}

}  // namespace detail

// March the linear deviation model, optionally closed with u = K x.
inline Trajectory2D simulate_linear(const StateSpace2D& ss,
                                    const std::optional<Eigen::MatrixXd>& gain,
                                    const BoundaryData& bdry, const GridSpec& spec) {
    ss.check();
    if (ss.n_h != 2 || ss.n_v != 2)
        throw std::invalid_argument("simulate_linear: expects 2+2 state blocks");

    const StateSpace2D sys = gain ? ss.closed_loop(*gain) : ss;
    const Eigen::Matrix4d A = sys.A, At = sys.A_tau;

    Trajectory2D traj;
    traj.spec = spec;
    traj.model_kind = "linear";
    traj.gain_applied = gain.has_value();
    traj.allocate();
    detail::fill_boundary(traj, bdry);

    const int d1 = spec.d1, d2 = spec.d2;
    // Vertical march on row 0 (horizontal components there are boundary).
    for (int j = 1; j <= spec.m2; ++j) {
        const double* xm = traj.at(0, j - 1);
        const double* hd = traj.at(-d1, j - 1);
        const double* vd = traj.at(0, j - 1 - d2);
        const double xd[4] = {hd[0], hd[1], vd[2], vd[3]};
        double* x = traj.at(0, j);
        for (int r = 2; r < 4; ++r) {
            double acc = 0.0;
            for (int c = 0; c < 4; ++c) acc += A(r, c) * xm[c] + At(r, c) * xd[c];
            x[r] = xm[r] + spec.h2 * acc;
        }
    }

    for (int i = 1; i <= spec.m1 && !traj.diverged; ++i) {
        for (int j = 0; j <= spec.m2; ++j) {
            double* x = traj.at(i, j);
            {
                const double* xm = traj.at(i - 1, j);
                const double* hd = traj.at(i - 1 - d1, j);
                const double* vd = traj.at(i - 1, j - d2);
                const double xd[4] = {hd[0], hd[1], vd[2], vd[3]};
                for (int r = 0; r < 2; ++r) {
                    double acc = 0.0;
                    for (int c = 0; c < 4; ++c) acc += A(r, c) * xm[c] + At(r, c) * xd[c];
                    x[r] = xm[r] + spec.h1 * acc;
                }
            }
            if (j >= 1) {
                const double* xm = traj.at(i, j - 1);
                const double* hd = traj.at(i - d1, j - 1);
                const double* vd = traj.at(i, j - 1 - d2);
                const double xd[4] = {hd[0], hd[1], vd[2], vd[3]};
                for (int r = 2; r < 4; ++r) {
                    double acc = 0.0;
                    for (int c = 0; c < 4; ++c) acc += A(r, c) * xm[c] + At(r, c) * xd[c];
                    x[r] = xm[r] + spec.h2 * acc;
                }
            }
            if (detail::overflowed(x)) {
                traj.diverged = true;
                traj.div_i = i;
                traj.div_j = j;
                return traj;
            }
        }
    }
    return traj;
}

// March the nonlinear model in absolute coordinates (W, q per dimension),
// with the drop probability driven through the gain: p = clamp(p_hat + K dx).
// Delay offsets are frozen at the equilibrium values baked into `spec`; the
// algebraic round-trip times inside the right-hand sides track the queues.
// Output is stored as deviations from the equilibrium.
inline Trajectory2D simulate_nonlinear(const NetworkParams& params,
                                       const EquilibriumPoint& eq,
                                       const std::optional<Eigen::MatrixXd>& gain,
                                       const BoundaryData& bdry, const GridSpec& spec,
                                       double w_max = 1e6, double q_max = 1e9) {
    Trajectory2D traj;
    traj.spec = spec;
    traj.model_kind = "nonlinear";
    traj.gain_applied = gain.has_value();
    traj.allocate();
    detail::fill_boundary(traj, bdry);

    const int d1 = spec.d1, d2 = spec.d2;
    // Saturation: W in [0, w_max], q in [0, q_max], p in [0, 1]. The tiny
    // floor on W keeps the per-window throughput form defined at W = 0.
    auto clamp_w = [&](double w) { return std::min(std::max(w, 1e-9), w_max); };
    auto clamp_q = [&](double q) { return std::min(std::max(q, 0.0), q_max); };
    auto p_at = [&](const double* dx) {
        double p = eq.p;
        if (gain) {
            // Row 1 of K drives p^v; the p^h channel never enters a
            // right-hand side, so only the second input row matters.
            for (int c = 0; c < 4; ++c) p += (*gain)(1, c) * dx[c];
        }
        return std::min(std::max(p, 0.0), 1.0);
    };

    auto derivative = [&](const double* dx, const double* dxh_del, const double* dxv_del,
                          const double* dx_pdel_h) {
        ModelPoint pt;
        pt.w_h = clamp_w(eq.w_h + dx[0]);
        pt.q_h = clamp_q(eq.q_h + dx[1]);
        pt.w_v = clamp_w(eq.w_v + dx[2]);
        pt.q_v = clamp_q(eq.q_v + dx[3]);
        pt.w_h_del = clamp_w(eq.w_h + dxh_del[0]);
        pt.q_h_del = clamp_q(eq.q_h + dxh_del[1]);
        pt.p_v = p_at(dx);
        pt.p_v_del = p_at(dx_pdel_h);
        pt.tau2 = round_trip_time(pt.q_v, params);
        return rhs_all(pt, params);
    };

    // Vertical march on row 0 (horizontal deviations there are boundary).
    for (int j = 1; j <= spec.m2; ++j) {
        const double* xm = traj.at(0, j - 1);
        const Derivative4 f = derivative(xm, traj.at(-d1, j - 1), traj.at(0, j - 1 - d2),
                                         traj.at(0, j - 1 - d2));
        double* x = traj.at(0, j);
        x[2] = clamp_w(eq.w_v + xm[2] + spec.h2 * f.dwv_dt2) - eq.w_v;
        x[3] = clamp_q(eq.q_v + xm[3] + spec.h2 * f.dqv_dt2) - eq.q_v;
    }

    for (int i = 1; i <= spec.m1 && !traj.diverged; ++i) {
        for (int j = 0; j <= spec.m2; ++j) {
            double* x = traj.at(i, j);
            {
                const double* xm = traj.at(i - 1, j);
                // The horizontal window sees p delayed by tau1.
                const Derivative4 f = derivative(xm, traj.at(i - 1 - d1, j),
                                                 traj.at(i - 1, j - d2),
                                                 traj.at(i - 1 - d1, j));
                x[0] = clamp_w(eq.w_h + xm[0] + spec.h1 * f.dwh_dt1) - eq.w_h;
                x[1] = clamp_q(eq.q_h + xm[1] + spec.h1 * f.dqh_dt1) - eq.q_h;
            }
            if (j >= 1) {
                const double* xm = traj.at(i, j - 1);
                // The vertical window sees p delayed by tau2.
                const Derivative4 f = derivative(xm, traj.at(i - d1, j - 1),
                                                 traj.at(i, j - 1 - d2),
                                                 traj.at(i, j - 1 - d2));
                x[2] = clamp_w(eq.w_v + xm[2] + spec.h2 * f.dwv_dt2) - eq.w_v;
                x[3] = clamp_q(eq.q_v + xm[3] + spec.h2 * f.dqv_dt2) - eq.q_v;
            }
            if (detail::overflowed(x)) {
                traj.diverged = true;
                traj.div_i = i;
                traj.div_j = j;
                return traj;
            }
        }
    }
    return traj;
}

// Sup-norm of the state along each interior anti-diagonal i + j = k,
// k = 0 .. m1 + m2.
inline std::vector<double> decay_profile(const Trajectory2D& traj) {
    const GridSpec& g = traj.spec;
    std::vector<double> s(static_cast<std::size_t>(g.m1) + g.m2 + 1, 0.0);
    const int imax = traj.diverged ? traj.div_i : g.m1;
    for (int i = 0; i <= imax; ++i) {
        const int jmax = (traj.diverged && i == traj.div_i) ? traj.div_j : g.m2;
        for (int j = 0; j <= jmax; ++j) {
            const double* x = traj.at(i, j);
            double v = 0.0;
            for (int r = 0; r < 4; ++r) v = std::max(v, std::abs(x[r]));
            s[i + j] = std::max(s[i + j], v);
        }
    }
    return s;
}

// CSV export: t1, t2, dWh, dqh, dWv, dqv over the interior grid, optionally
// strided to keep files manageable.
inline void write_trajectory_csv(const Trajectory2D& traj, std::ostream& os,
                                 int stride = 1) {
    if (stride < 1) throw std::invalid_argument("write_trajectory_csv: stride >= 1");
    const GridSpec& g = traj.spec;
    os << "t1,t2,dWh,dqh,dWv,dqv\n";
    for (int i = 0; i <= g.m1; i += stride)
        for (int j = 0; j <= g.m2; j += stride) {
            if (traj.diverged &&
                (i > traj.div_i || (i == traj.div_i && j > traj.div_j)))
                continue;
            const double* x = traj.at(i, j);
            os << i * g.h1 << ',' << j * g.h2 << ',' << x[0] << ',' << x[1] << ','
               << x[2] << ',' << x[3] << '\n';
        }
}

inline void write_decay_csv(const std::vector<double>& s, std::ostream& os) {
    os << "k,sup_norm\n";
    for (std::size_t k = 0; k < s.size(); ++k) os << k << ',' << s[k] << '\n';
}

}  // namespace aqm2d
