#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aqm2d/bessel_legendre.hpp"

using namespace aqm2d;

TEST_CASE("shifted Legendre weights") {
    CHECK(legendre_weight(0, 0.37, 0.0, 1.0) == 1.0);
    CHECK(legendre_weight(1, 0.5, 0.0, 1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(legendre_weight(1, -2.0, -2.0, 3.0) == Catch::Approx(-1.0));
    CHECK(legendre_weight(1, 3.0, -2.0, 3.0) == Catch::Approx(1.0));

    SECTION("orthogonality under quadrature") {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < i; ++j) {
                const double ip = quadrature(
                    [&](double u) {
                        return legendre_weight(i, u, -1.5, 2.0) *
                               legendre_weight(j, u, -1.5, 2.0);
                    },
                    -1.5, 2.0);
                CHECK(std::abs(ip) <= 1e-12);
            }
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(legendre_weight(0, 2.0, 0.0, 1.0), std::domain_error);
        CHECK_THROWS_AS(legendre_weight(0, 0.5, 1.0, 0.0), std::domain_error);
        CHECK_THROWS_AS(legendre_weight(-1, 0.5, 0.0, 1.0), std::domain_error);
    }
}

TEST_CASE("quadrature is exact on polynomials") {
    // degree-7 monomial over an asymmetric interval
    const double v = quadrature([](double u) { return u * u * u * u * u * u * u; },
                                -1.0, 2.0);
    CHECK(v == Catch::Approx((std::pow(2.0, 8) - 1.0) / 8.0).epsilon(1e-13));
}

TEST_CASE("projection coefficient table") {
    CHECK(bl_theta(0, 0) == 0.0);
    CHECK(bl_theta(1, 0) == -2.0);
    CHECK(bl_theta(1, 1) == 0.0);
    CHECK(bl_theta(2, 0) == 0.0);
    CHECK(bl_theta(2, 1) == -6.0);
    CHECK(bl_theta(0, 1) == 0.0);  // j > k
}

TEST_CASE("combination row patterns") {
    const BLBasis b = BLBasis::make(2, 1);
    REQUIRE(b.pi_rows.size() == 3);
    Eigen::RowVectorXd r0(4), r1(4), r2(4);
    r0 << 1, -1, 0, 0;
    r1 << 1, 1, -2, 0;
    r2 << 1, -1, 0, -6;
    CHECK(b.pi_rows[0].isApprox(r0));
    CHECK(b.pi_rows[1].isApprox(r1));
    CHECK(b.pi_rows[2].isApprox(r2));
    CHECK(b.weights == std::vector<double>{1.0, 3.0, 5.0});
    CHECK_THROWS_AS(BLBasis::make(3, 1), std::domain_error);
}

TEST_CASE("combination rows over selector blocks") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const auto rows = combination_rows(2, {id, id, 0.0 * id, 0.0 * id});
    // x(b) = x(a) and zero moments: rows collapse to (0, 2I, 0).
    CHECK(rows[0].isZero(1e-15));
    CHECK(rows[1].isApprox(2.0 * id));
    CHECK(rows[2].isZero(1e-15));
    CHECK_THROWS_AS(combination_rows(2, {id, id}), std::invalid_argument);
}

TEST_CASE("third combination row evaluated two ways") {
    // quadratic x on [0, 1]: selector route must equal x(1) - x(0) - 6 chi_1
    // computed by direct quadrature.
    auto x = [](double u) -> Eigen::VectorXd {
        Eigen::VectorXd v(1);
        v << 2.0 * u * u - 0.7 * u + 0.3;
        return v;
    };
    const Eigen::VectorXd chi1 = quadrature(
        [&](double u) -> Eigen::VectorXd { return legendre_weight(1, u, 0.0, 1.0) * x(u); },
        0.0, 1.0);
    const double direct = x(1.0)(0) - x(0.0)(0) - 6.0 * chi1(0);

    const BLBasis b = BLBasis::make(2, 1);
    Eigen::VectorXd gamma(4);
    const Eigen::VectorXd chi0 = quadrature(
        [&](double u) -> Eigen::VectorXd { return x(u); }, 0.0, 1.0);
    gamma << x(1.0)(0), x(0.0)(0), chi0(0), chi1(0);
    CHECK((b.pi_rows[2] * gamma)(0) == Catch::Approx(direct).margin(1e-12));
}

TEST_CASE("integral lower bound: exactness cases") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(1, 1);
    SECTION("constant trajectory gives zero on both sides") {
        auto x = [](double) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, 3.0); };
        CHECK(bl_lower_bound(x, 0.0, 2.0, z, 0) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("affine trajectory is tight at order 0") {
        const double c = 1.7;
        auto x = [&](double u) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, c * u); };
        CHECK(bl_lower_bound(x, 0.0, 1.0, z, 0) == Catch::Approx(c * c).margin(1e-12));
    }
}

TEST_CASE("hierarchy and validity over random polynomials") {
    std::mt19937 rng(42u);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> len(0.05, 3.0);
    std::uniform_real_distribution<double> start(-2.0, 2.0);

    for (int t = 0; t < 100; ++t) {
        const double a = start(rng), b = a + len(rng);
        Eigen::Matrix2d z;
        z << 1.0 + std::abs(coef(rng)), 0.2 * coef(rng), 0.0, 1.0 + std::abs(coef(rng));
        z(1, 0) = z(0, 1);
        Eigen::Matrix<double, 2, 6> c;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 6; ++j) c(i, j) = coef(rng);
        auto x = [&](double u) -> Eigen::VectorXd {
            Eigen::Vector2d v = Eigen::Vector2d::Zero();
            double pw = 1.0;
            for (int j = 0; j < 6; ++j, pw *= u) v += pw * c.col(j);
            return v;
        };
        auto xd = [&](double u) -> Eigen::VectorXd {
            Eigen::Vector2d v = Eigen::Vector2d::Zero();
            double pw = 1.0;
            for (int j = 1; j < 6; ++j, pw *= u) v += j * pw * c.col(j);
            return v;
        };
        const double lhs = derivative_energy(xd, a, b, z);
        const double znorm = z.norm();
        double prev = -1e300;
        for (int order = 0; order <= 2; ++order) {
            const double bound = bl_lower_bound(x, a, b, z, order);
            INFO("trial " << t << " order " << order);
            CHECK(lhs - bound >= -1e-10 * std::max(1.0, znorm));
            CHECK(bound >= prev - 1e-10 * std::max(1.0, znorm));
            prev = bound;
        }
    }
}

TEST_CASE("equality certificates: degree order+1 polynomials are tight") {
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Eigen::MatrixXd z(1, 1);
    z << 1.3;
    for (int order = 0; order <= 2; ++order) {
        Eigen::VectorXd c(order + 2);
        for (int j = 0; j < c.size(); ++j) c(j) = coef(rng);
        auto x = [&](double u) -> Eigen::VectorXd {
            double v = 0.0, pw = 1.0;
            for (int j = 0; j < c.size(); ++j, pw *= u) v += pw * c(j);
            return Eigen::VectorXd::Constant(1, v);
        };
        auto xd = [&](double u) -> Eigen::VectorXd {
            double v = 0.0, pw = 1.0;
            for (int j = 1; j < c.size(); ++j, pw *= u) v += j * pw * c(j);
            return Eigen::VectorXd::Constant(1, v);
        };
        const double lhs = derivative_energy(xd, -0.3, 1.1, z);
        const double bound = bl_lower_bound(x, -0.3, 1.1, z, order);
        INFO("order " << order);
        CHECK(lhs - bound == Catch::Approx(0.0).margin(1e-10));
    }
}
