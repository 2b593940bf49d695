#pragma once

// Legendre-projection machinery for the integral lower bound
//   int_a^b xdot' Z xdot du  >=  (1/(b-a)) sum_k (2k+1) (pi_k G)' Z (pi_k G)
// with G = col{x(b), x(a), chi_0, .., chi_{N-1}} and chi_j the j-th shifted
// Legendre moment of x over [a, b]. Orders N = 0, 1, 2 are supported; the
// stability conditions use N = 2.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace aqm2d {

// 64-node Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on the
// recurrence. Exact for polynomials up to degree 127, far beyond any
// integrand used here.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& rule() {
        static const GaussLegendre g(64);
        return g;
    }

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

template <typename F>
auto quadrature(F&& f, double a, double b) -> decltype(f(a)) {
    const auto& g = GaussLegendre::rule();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto acc = decltype(f(a))(g.weights[0] * f(mid + half * g.nodes[0]));
    for (std::size_t i = 1; i < g.nodes.size(); ++i)
        acc += g.weights[i] * f(mid + half * g.nodes[i]);
    return half * acc;
}

// Shifted Legendre polynomial F_i on [a, b]: F_0 = 1, F_1 = 2(u-a)/(b-a) - 1,
// orthogonal family on the interval.
inline double legendre_weight(int i, double u, double a, double b) {
    if (!(a < b))
        throw std::domain_error("legendre_weight: need a < b");
    if (u < a || u > b)
        throw std::domain_error("legendre_weight: u outside [a, b]");
    if (i < 0)
        throw std::domain_error("legendre_weight: negative order");
    const double s = 2.0 * (u - a) / (b - a) - 1.0;
    return std::legendre(static_cast<unsigned>(i), s);
}

// Projection coefficient theta_{Nk}^j: the weight of the j-th moment block
// in the k-th combination row.
inline double bl_theta(int k, int j) {
    if (j > k) return 0.0;
    return -(2.0 * j + 1.0) * (1.0 - (((k + j) % 2 == 0) ? 1.0 : -1.0));
}

struct BLBasis {
    int order = 0;      // N in {0, 1, 2}
    int block_dim = 0;  // n
    std::vector<Eigen::MatrixXd> pi_rows;  // N+1 rows, each n x (N+2)n
    std::vector<double> weights;           // 2k+1

    static BLBasis make(int order, int block_dim) {
        if (order < 0 || order > 2)
            throw std::domain_error("BLBasis: order must be 0, 1 or 2");
        BLBasis b;
        b.order = order;
        b.block_dim = block_dim;
        const int n = block_dim;
        const auto id = Eigen::MatrixXd::Identity(n, n);
        for (int k = 0; k <= order; ++k) {
            Eigen::MatrixXd row = Eigen::MatrixXd::Zero(n, (order + 2) * n);
            row.block(0, 0, n, n) = id;
            row.block(0, n, n, n) = (k % 2 == 0 ? -1.0 : 1.0) * id;
            for (int j = 0; j < order; ++j)
                row.block(0, (2 + j) * n, n, n) = bl_theta(k, j) * id;
            b.pi_rows.push_back(row);
            b.weights.push_back(2.0 * k + 1.0);
        }
        return b;
    }
};

// Combination rows for selector matrices: given blocks
// {current, delayed, moment_0, .., moment_{N-1}} (each r x c), returns the
// N+1 rows current + (-1)^{k+1} delayed + sum_j theta_k^j moment_j.
inline std::vector<Eigen::MatrixXd> combination_rows(
    int order, const std::vector<Eigen::MatrixXd>& blocks) {
    if (static_cast<int>(blocks.size()) != order + 2)
        throw std::invalid_argument("combination_rows: need order + 2 blocks");
    std::vector<Eigen::MatrixXd> rows;
    for (int k = 0; k <= order; ++k) {
        Eigen::MatrixXd row = blocks[0] + (k % 2 == 0 ? -1.0 : 1.0) * blocks[1];
        for (int j = 0; j < order; ++j)
            row += bl_theta(k, j) * blocks[2 + j];
        rows.push_back(row);
    }
    return rows;
}

using VectorFunction = std::function<Eigen::VectorXd(double)>;

// Right-hand side of the inequality for a concrete trajectory x.
inline double bl_lower_bound(const VectorFunction& x, double a, double b,
                             const Eigen::MatrixXd& Z, int order) {
    if (!(a < b))
        throw std::domain_error("bl_lower_bound: need a < b");
    const int n = static_cast<int>(Z.rows());
    const double len = b - a;

    std::vector<Eigen::VectorXd> gamma_parts;
    gamma_parts.push_back(x(b));
    gamma_parts.push_back(x(a));
    for (int j = 0; j < order; ++j) {
        Eigen::VectorXd chi = quadrature(
            [&](double u) -> Eigen::VectorXd { return legendre_weight(j, u, a, b) * x(u); },
            a, b);
        gamma_parts.push_back(chi / len);
    }
    Eigen::VectorXd gamma((order + 2) * n);
    for (int i = 0; i < order + 2; ++i)
        gamma.segment(i * n, n) = gamma_parts[i];

    const BLBasis basis = BLBasis::make(order, n);
    double bound = 0.0;
    for (int k = 0; k <= order; ++k) {
        const Eigen::VectorXd v = basis.pi_rows[k] * gamma;
        bound += basis.weights[k] * v.dot(Z * v);
    }
    return bound / len;
}

// Left-hand side int_a^b xdot' Z xdot for comparison against the bound.
inline double derivative_energy(const VectorFunction& xdot, double a, double b,
                                const Eigen::MatrixXd& Z) {
    return quadrature([&](double u) -> double {
        const Eigen::VectorXd v = xdot(u);
        return v.dot(Z * v);
    }, a, b);
}

}  // namespace aqm2d
