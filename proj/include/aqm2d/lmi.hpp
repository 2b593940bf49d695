#pragma once

// Stability analysis and state-feedback synthesis conditions for the 2D
// delay system, posed as semidefinite feasibility problems.
//
// The quadratic form lives on xi = col{x, x_d, phi_1, phi_2, dx}: current
// state, delayed state, zeroth and first Legendre moments of the state over
// the delay window, and the axis-wise derivative. Five block selectors
// e_1..e_5 address the slots; each splits into horizontal and vertical rows.
//
// Analysis (0-input): find P^h, P^v, Q, R positive definite and any H with
//   Pi - Gamma' diag(R,3R,5R) Gamma + He(M' H g0) < 0,
// where g0 = A e1 + A_tau e2 - e5 is the zero equation and M = e1 + e2 + e5
// its multiplier. Synthesis replaces the zero term by
//   g1 = (A H + B V) e1 + (A_tau H + B_tau V) e2 - H e5,
// with H block diagonal, and recovers the gain K = V H^{-1}.
//
// All inequalities are homogeneous in the decision variables, so they are
// solved in margin-maximization form over a unit ball (sdp_solver.hpp): a
// strictly feasible point exists iff the attained margin is positive. The
// verdict is never taken from the solver alone; Feasible requires an
// eigenvalue re-verification of every constraint at the returned assignment.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bessel_legendre.hpp"
#include "sdp_solver.hpp"
#include "state_space.hpp"

namespace aqm2d {

// Block selectors over xi (dimension 5n). selector(i) picks slot i (1-based);
// the h/v variants pick the horizontal/vertical rows of the slot.
struct SelectorBasis {
    int n_h = 0, n_v = 0;

    int n() const { return n_h + n_v; }
    int xi_dim() const { return 5 * n(); }

    Eigen::MatrixXd selector(int i) const {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n(), xi_dim());
        e.block(0, (i - 1) * n(), n(), n()).setIdentity();
        return e;
    }
    Eigen::MatrixXd selector_h(int i) const { return selector(i).topRows(n_h); }
    Eigen::MatrixXd selector_v(int i) const { return selector(i).bottomRows(n_v); }
};

struct LmiVariables {
    int n_h = 0, n_v = 0, m = 0;
    Eigen::MatrixXd Ph, Pv;  // S(3 n_h), S(3 n_v)
    Eigen::MatrixXd Qh, Qv;  // S(n_h), S(n_v)
    Eigen::MatrixXd Rh, Rv;  // S(n_h), S(n_v)
    Eigen::MatrixXd Hh, Hv;  // n_h x n_h, n_v x n_v, unstructured
    Eigen::MatrixXd V;       // m x (n_h + n_v); synthesis only (else 0 x 0)

    static LmiVariables zero(int n_h, int n_v, int m, bool synthesis) {
        LmiVariables v;
        v.n_h = n_h;
        v.n_v = n_v;
        v.m = synthesis ? m : 0;
        v.Ph = Eigen::MatrixXd::Zero(3 * n_h, 3 * n_h);
        v.Pv = Eigen::MatrixXd::Zero(3 * n_v, 3 * n_v);
        v.Qh = Eigen::MatrixXd::Zero(n_h, n_h);
        v.Qv = Eigen::MatrixXd::Zero(n_v, n_v);
        v.Rh = Eigen::MatrixXd::Zero(n_h, n_h);
        v.Rv = Eigen::MatrixXd::Zero(n_v, n_v);
        v.Hh = Eigen::MatrixXd::Zero(n_h, n_h);
        v.Hv = Eigen::MatrixXd::Zero(n_v, n_v);
        v.V = synthesis ? Eigen::MatrixXd::Zero(m, n_h + n_v) : Eigen::MatrixXd();
        return v;
    }

    Eigen::MatrixXd H() const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_h + n_v, n_h + n_v);
        h.topLeftCorner(n_h, n_h) = Hh;
        h.bottomRightCorner(n_v, n_v) = Hv;
        return h;
    }

    LmiVariables scaled(double c) const {
        LmiVariables v = *this;
        v.Ph *= c; v.Pv *= c; v.Qh *= c; v.Qv *= c;
        v.Rh *= c; v.Rv *= c; v.Hh *= c; v.Hv *= c;
        if (v.V.size() > 0) v.V *= c;
        return v;
    }
};

namespace detail {

inline Eigen::MatrixXd he(const Eigen::MatrixXd& x) { return x + x.transpose(); }

// Enumerate the scalar decision variables: symmetric matrices contribute one
// basis element per upper-triangle entry, unstructured ones per entry.
struct VariableLayout {
    struct Slice {
        std::string name;
        int offset;
        int count;
        int rows, cols;
        bool symmetric;
    };
    std::vector<Slice> slices;
    int total = 0;

    void add(const std::string& name, int rows, int cols, bool symmetric) {
        const int count = symmetric ? rows * (rows + 1) / 2 : rows * cols;
        slices.push_back({name, total, count, rows, cols, symmetric});
        total += count;
    }

    static VariableLayout make(int n_h, int n_v, int m, bool synthesis) {
        VariableLayout l;
        l.add("Ph", 3 * n_h, 3 * n_h, true);
        l.add("Pv", 3 * n_v, 3 * n_v, true);
        l.add("Qh", n_h, n_h, true);
        l.add("Qv", n_v, n_v, true);
        l.add("Rh", n_h, n_h, true);
        l.add("Rv", n_v, n_v, true);
        l.add("Hh", n_h, n_h, false);
        l.add("Hv", n_v, n_v, false);
        if (synthesis) l.add("V", m, n_h + n_v, false);
        return l;
    }
};

inline void unpack_slice(const VariableLayout::Slice& s, const Eigen::VectorXd& x,
                         Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Zero(s.rows, s.cols);
    int k = s.offset;
    if (s.symmetric) {
        for (int i = 0; i < s.rows; ++i)
            for (int j = i; j < s.cols; ++j) {
                out(i, j) = x(k);
                out(j, i) = x(k);
                ++k;
            }
    } else {
        for (int i = 0; i < s.rows; ++i)
            for (int j = 0; j < s.cols; ++j) out(i, j) = x(k++);
    }
}

inline LmiVariables unpack(const VariableLayout& layout, const Eigen::VectorXd& x,
                           int n_h, int n_v, int m, bool synthesis) {
    LmiVariables v = LmiVariables::zero(n_h, n_v, m, synthesis);
    for (const auto& s : layout.slices) {
        if (s.name == "Ph") unpack_slice(s, x, v.Ph);
        else if (s.name == "Pv") unpack_slice(s, x, v.Pv);
        else if (s.name == "Qh") unpack_slice(s, x, v.Qh);
        else if (s.name == "Qv") unpack_slice(s, x, v.Qv);
        else if (s.name == "Rh") unpack_slice(s, x, v.Rh);
        else if (s.name == "Rv") unpack_slice(s, x, v.Rv);
        else if (s.name == "Hh") unpack_slice(s, x, v.Hh);
        else if (s.name == "Hv") unpack_slice(s, x, v.Hv);
        else if (s.name == "V") unpack_slice(s, x, v.V);
    }
    return v;
}

}  // namespace detail

// Lyapunov-derivative part of the quadratic form:
//   He(E^h' P^h Ah) + He(E^v' P^v Av) + e1' Q e1 - e2' Q e2
//   + e5' diag(tau1^2 R^h, tau2^2 R^v) e5
inline Eigen::MatrixXd build_pi(const StateSpace2D& ss, const LmiVariables& vars) {
    const SelectorBasis sel{ss.n_h, ss.n_v};
    auto eh = [&](int i) { return sel.selector_h(i); };
    auto ev = [&](int i) { return sel.selector_v(i); };

    Eigen::MatrixXd Eh(3 * ss.n_h, sel.xi_dim());
    Eh << eh(1), ss.tau1 * eh(3), ss.tau1 * eh(4);
    Eigen::MatrixXd Ev(3 * ss.n_v, sel.xi_dim());
    Ev << ev(1), ss.tau2 * ev(3), ss.tau2 * ev(4);
    Eigen::MatrixXd Ah(3 * ss.n_h, sel.xi_dim());
    Ah << eh(5), eh(1) - eh(2), eh(1) + eh(2) - 2.0 * eh(3);
    Eigen::MatrixXd Av(3 * ss.n_v, sel.xi_dim());
    Av << ev(5), ev(1) - ev(2), ev(1) + ev(2) - 2.0 * ev(3);

    return detail::he(Eh.transpose() * vars.Ph * Ah) +
           detail::he(Ev.transpose() * vars.Pv * Av) +
           eh(1).transpose() * vars.Qh * eh(1) + ev(1).transpose() * vars.Qv * ev(1) -
           eh(2).transpose() * vars.Qh * eh(2) - ev(2).transpose() * vars.Qv * ev(2) +
           eh(5).transpose() * (ss.tau1 * ss.tau1 * vars.Rh) * eh(5) +
           ev(5).transpose() * (ss.tau2 * ss.tau2 * vars.Rv) * ev(5);
}

// Full left-hand side of the analysis (synthesis = false) or synthesis
// (synthesis = true) inequality, evaluated at a concrete assignment.
// literal_g1 reproduces the stated synthesis zero-term, which keeps a bare
// -e5 in the derivative slot instead of the coordinate-consistent -H e5.
inline Eigen::MatrixXd build_lhs(const StateSpace2D& ss, const LmiVariables& vars,
                                 bool synthesis, bool literal_g1 = false) {
    const SelectorBasis sel{ss.n_h, ss.n_v};
    auto e = [&](int i) { return sel.selector(i); };
    auto eh = [&](int i) { return sel.selector_h(i); };
    auto ev = [&](int i) { return sel.selector_v(i); };

    Eigen::MatrixXd lhs = build_pi(ss, vars);

    const auto gh = combination_rows(2, {eh(1), eh(2), eh(3), eh(4)});
    const auto gv = combination_rows(2, {ev(1), ev(2), ev(3), ev(4)});
    for (int k = 0; k <= 2; ++k) {
        const double w = 2.0 * k + 1.0;
        lhs -= w * (gh[k].transpose() * vars.Rh * gh[k] +
                    gv[k].transpose() * vars.Rv * gv[k]);
    }

    const Eigen::MatrixXd M = e(1) + e(2) + e(5);
    const Eigen::MatrixXd Mh = M.topRows(ss.n_h);
    const Eigen::MatrixXd Mv = M.bottomRows(ss.n_v);
    if (!synthesis) {
        const Eigen::MatrixXd g0 = ss.A * e(1) + ss.A_tau * e(2) - e(5);
        lhs += detail::he(Mh.transpose() * vars.Hh * g0.topRows(ss.n_h) +
                          Mv.transpose() * vars.Hv * g0.bottomRows(ss.n_v));
    } else {
        const Eigen::MatrixXd H = vars.H();
        const Eigen::MatrixXd deriv = literal_g1 ? e(5) : Eigen::MatrixXd(H * e(5));
        const Eigen::MatrixXd g1 = (ss.A * H + ss.B * vars.V) * e(1) +
                                   (ss.A_tau * H + ss.B_tau * vars.V) * e(2) - deriv;
        lhs += detail::he(Mh.transpose() * g1.topRows(ss.n_h) +
                          Mv.transpose() * g1.bottomRows(ss.n_v));
    }
    return lhs;
}

struct LmiOptions {
    // State scaling D applied as A -> D A D^{-1} (and B -> D B) before
    // assembly. Empty means identity. The default for the TCP/AQM state
    // ordering compresses the queue components, whose entries are two to
    // three orders larger than the window ones.
    Eigen::VectorXd balance;
    bool literal_g1 = false;
    // Strictness margin for the returned certificate: epsilon_scale times the
    // largest system-matrix entry (after balancing).
    double epsilon_scale = 1e-6;
    // The solver keeps every iterate strictly inside the cone, so any
    // attained t clear of numerical noise witnesses strict feasibility; the
    // eigenvalue re-verification in solve_lmi() remains the final authority.
    // An infeasible homogeneous problem drives t to 0 from below.
    double feasible_threshold = 1e-8;   // attained t above which -> try Feasible
    double infeasible_threshold = 1e-9; // attained t below which -> Infeasible

    static Eigen::VectorXd default_balance_4state() {
        Eigen::VectorXd d(4);
        d << 1.0, 0.01, 1.0, 0.01;
        return d;
    }
};

struct LmiProblem {
    bool synthesis = false;
    bool literal_g1 = false;
    StateSpace2D ss;           // balanced realization actually assembled
    Eigen::VectorXd balance;   // diagonal of D (identity if empty)
    detail::VariableLayout layout;
    SdpProblem sdp;
    std::vector<std::string> block_labels;
    double epsilon = 0.0;
};

namespace detail {

inline StateSpace2D apply_balance(const StateSpace2D& ss, const Eigen::VectorXd& d) {
    if (d.size() == 0) return ss;
    if (d.size() != ss.n())
        throw std::invalid_argument("balance vector length must equal state dim");
    StateSpace2D out = ss;
    const Eigen::MatrixXd D = d.asDiagonal();
    const Eigen::MatrixXd Di = d.cwiseInverse().asDiagonal();
    out.A = D * ss.A * Di;
    out.A_tau = D * ss.A_tau * Di;
    if (ss.B.size() > 0) out.B = D * ss.B;
    if (ss.B_tau.size() > 0) out.B_tau = D * ss.B_tau;
    return out;
}

}  // namespace detail

inline LmiProblem build_lmi_problem(const StateSpace2D& ss_in, bool synthesis,
                                    const LmiOptions& opt = {}) {
    StateSpace2D ss = detail::apply_balance(ss_in, opt.balance);
    ss.check();
    const int n_h = ss.n_h, n_v = ss.n_v, m = ss.m();

    LmiProblem prob;
    prob.synthesis = synthesis;
    prob.literal_g1 = opt.literal_g1;
    prob.ss = ss;
    prob.balance = opt.balance;
    prob.layout = detail::VariableLayout::make(n_h, n_v, m, synthesis);

    double scale = std::max(ss.A.cwiseAbs().maxCoeff(), ss.A_tau.cwiseAbs().maxCoeff());
    if (synthesis && ss.B.size() > 0)
        scale = std::max({scale, ss.B.cwiseAbs().maxCoeff(), ss.B_tau.cwiseAbs().maxCoeff()});
    prob.epsilon = opt.epsilon_scale * std::max(1.0, scale);

    // Positive-definiteness blocks and the main inequality, all homogeneous.
    const int nv = prob.layout.total;
    auto add_block = [&](const std::string& label, int dim) {
        prob.sdp.blocks.push_back({Eigen::MatrixXd::Zero(dim, dim), {}});
        prob.sdp.blocks.back().F.reserve(nv);
        prob.block_labels.push_back(label);
    };
    add_block("Ph", 3 * n_h);
    add_block("Pv", 3 * n_v);
    add_block("Qh", n_h);
    add_block("Qv", n_v);
    add_block("Rh", n_h);
    add_block("Rv", n_v);
    add_block("main", 5 * (n_h + n_v));

    Eigen::VectorXd unit = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < nv; ++i) {
        unit.setZero();
        unit(i) = 1.0;
        const LmiVariables v = detail::unpack(prob.layout, unit, n_h, n_v, m, synthesis);
        prob.sdp.blocks[0].F.push_back(v.Ph);
        prob.sdp.blocks[1].F.push_back(v.Pv);
        prob.sdp.blocks[2].F.push_back(v.Qh);
        prob.sdp.blocks[3].F.push_back(v.Qv);
        prob.sdp.blocks[4].F.push_back(v.Rh);
        prob.sdp.blocks[5].F.push_back(v.Rv);
        prob.sdp.blocks[6].F.push_back(-build_lhs(ss, v, synthesis, opt.literal_g1));
    }
    prob.sdp.nvar = nv;
    return prob;
}

inline LmiProblem build_theorem1(const StateSpace2D& ss, const LmiOptions& opt = {}) {
    return build_lmi_problem(ss, /*synthesis=*/false, opt);
}

inline LmiProblem build_theorem2(const StateSpace2D& ss, const LmiOptions& opt = {}) {
    if (ss.B.size() == 0 || ss.B_tau.size() == 0)
        throw std::invalid_argument("build_theorem2: input matrices required");
    return build_lmi_problem(ss, /*synthesis=*/true, opt);
}

enum class LmiStatus { Feasible, Infeasible, SolverUnknown };

struct StabilityVerdict {
    LmiStatus status = LmiStatus::SolverUnknown;
    double margin = 0.0;      // smallest eigenvalue slack, re-verified
    double attained_t = 0.0;  // solver's margin over the unit ball
    LmiVariables assignment;  // meaningful when Feasible
    std::string diagnostics;
};

// Smallest eigenvalue slack over all constraints at a concrete assignment
// (positive blocks count lambda_min, the main block counts -lambda_max).
inline double verify_margin(const LmiProblem& prob, const Eigen::VectorXd& x) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& blk : prob.sdp.blocks) {
        const Eigen::MatrixXd s = detail::block_value(blk, x, 0.0);
        const double lam =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff();
        margin = std::min(margin, lam);
    }
    return margin;
}

inline StabilityVerdict solve_lmi(const LmiProblem& prob,
                                  const LmiOptions& opt = {},
                                  const SdpSettings& sdp_settings = {}) {
    StabilityVerdict verdict;
    if (prob.sdp.blocks.empty()) {
        verdict.status = LmiStatus::Feasible;
        verdict.diagnostics = "no constraints";
        return verdict;
    }

    SdpSolution sol;
    try {
        sol = solve_sdp(prob.sdp, sdp_settings);
    } catch (const std::exception& e) {
        verdict.status = LmiStatus::SolverUnknown;
        verdict.diagnostics = std::string("solver failure: ") + e.what();
        return verdict;
    }
    verdict.attained_t = sol.t;

    if (sol.t >= opt.feasible_threshold) {
        // Homogeneous problem: rescale the assignment so the strictness
        // margin epsilon is met, then re-verify by direct eigensolve.
        const double c = prob.epsilon / sol.t;
        const Eigen::VectorXd x = c * sol.x;
        const double margin = verify_margin(prob, x);
        if (margin >= 0.99 * prob.epsilon) {
            verdict.status = LmiStatus::Feasible;
            verdict.margin = margin;
            verdict.assignment = detail::unpack(prob.layout, x, prob.ss.n_h, prob.ss.n_v,
                                                prob.ss.m(), prob.synthesis);
            return verdict;
        }
        verdict.status = LmiStatus::SolverUnknown;
        verdict.diagnostics = "re-verification failed: margin " + std::to_string(margin);
        return verdict;
    }
    if (sol.t < opt.infeasible_threshold) {
        // x = 0 always attains margin 0 for a homogeneous problem, so a
        // maximized margin at (or below) zero means no strictly feasible
        // point exists.
        verdict.status = LmiStatus::Infeasible;
        verdict.margin = sol.t;
        return verdict;
    }
    verdict.status = LmiStatus::SolverUnknown;
    verdict.diagnostics = "attained margin in the undecided band";
    return verdict;
}

class GainExtractionError : public std::runtime_error {
  public:
    GainExtractionError(const std::string& msg, double condition)
        : std::runtime_error(msg), condition(condition) {}
    double condition;
};

// K = V H^{-1}, mapped back through the balancing so it applies to the
// original (unscaled) state.
inline Eigen::MatrixXd extract_gain(const LmiVariables& vars,
                                    const Eigen::VectorXd& balance = Eigen::VectorXd(),
                                    double max_condition = 1e8) {
    const Eigen::MatrixXd H = vars.H();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition))
        throw GainExtractionError("extract_gain: H ill conditioned", cond);
    Eigen::MatrixXd K = vars.V * H.inverse();
    if (balance.size() > 0) K = K * Eigen::MatrixXd(balance.asDiagonal());
    return K;
}

}  // namespace aqm2d
