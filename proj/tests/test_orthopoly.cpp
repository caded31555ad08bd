#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fsnet/orthopoly.hpp"
#include "test_helpers.hpp"

using namespace fsnet;
using fsnet::testing::Rng;

TEST_CASE("eval_basis low orders match closed forms") {
    const PolyVector leg1 = eval_basis(BasisKind::Legendre, 1, 0.7);
    CHECK(leg1.values[0] == 1.0);
    CHECK(leg1.values[1] == 0.7);

    // L_2 = (3t^2 - 1)/2, L_3 = (5t^3 - 3t)/2 at t = 0.5
    const PolyVector leg3 = eval_basis(BasisKind::Legendre, 3, 0.5);
    CHECK(leg3.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(leg3.values[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(leg3.values[2] == doctest::Approx(-0.125).epsilon(1e-15));
    CHECK(leg3.values[3] == doctest::Approx(-0.4375).epsilon(1e-15));

    // C_n(cos pi/3) = cos(n pi/3)
    const PolyVector che3 = eval_basis(BasisKind::Chebyshev, 3, 0.5);
    CHECK(che3.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(che3.values[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(che3.values[2] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(che3.values[3] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("eval_basis rejects bad input") {
    CHECK_THROWS_AS(eval_basis(BasisKind::Legendre, 3, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(eval_basis(BasisKind::Legendre, 3, INFINITY), std::invalid_argument);
    CHECK_THROWS_AS(eval_basis(BasisKind::Legendre, -1, 0.0), std::invalid_argument);
}

TEST_CASE("first derivative matrices match the displayed 6x6 forms") {
    const double leg[6][6] = {
        {0, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0}, {0, 3, 0, 0, 0, 0},
        {1, 0, 5, 0, 0, 0}, {0, 3, 0, 7, 0, 0}, {1, 0, 5, 0, 9, 0},
    };
    const double che[6][6] = {
        {0, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0}, {0, 4, 0, 0, 0, 0},
        {3, 0, 6, 0, 0, 0}, {0, 8, 0, 8, 0, 0}, {5, 0, 10, 0, 10, 0},
    };
    const OperationalMatrix ml = operational_matrix(BasisKind::Legendre, 5, 1);
    const OperationalMatrix mc = operational_matrix(BasisKind::Chebyshev, 5, 1);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(ml(i, j) == leg[i][j]);
            CHECK(mc(i, j) == che[i][j]);
        }
    }
}

TEST_CASE("matrices are strictly lower triangular") {
    for (const BasisKind basis : {BasisKind::Legendre, BasisKind::Chebyshev}) {
        for (int power = 1; power <= 3; ++power) {
            const OperationalMatrix m = operational_matrix(basis, 9, power);
            for (int i = 0; i < m.dim(); ++i) {
                for (int j = i; j < m.dim(); ++j) CHECK(m(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("powers equal repeated application of the first derivative matrix") {
    for (const BasisKind basis : {BasisKind::Legendre, BasisKind::Chebyshev}) {
        const int order = 8;
        const int n = order + 1;
        const OperationalMatrix m1 = operational_matrix(basis, order, 1);
        // entries are integers, so the explicit products are exact
        std::vector<double> expected(m1.entries);
        for (int power = 2; power <= 3; ++power) {
            std::vector<double> next(static_cast<std::size_t>(n) * n, 0.0);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) {
                    const double aik = expected[static_cast<std::size_t>(i) * n + k];
                    if (aik == 0.0) continue;
                    for (int j = 0; j < n; ++j) {
                        next[static_cast<std::size_t>(i) * n + j] +=
                            aik * m1.entries[static_cast<std::size_t>(k) * n + j];
                    }
                }
            }
            expected.swap(next);
            const OperationalMatrix mk = operational_matrix(basis, order, power);
            CHECK(mk.entries == expected);
        }
    }
}

TEST_CASE("row 3 of the Legendre matrix differentiates L_3") {
    // L_3'(t) = 1 L_0 + 5 L_2 = (15 t^2 - 3)/2
    Rng rng(11);
    const OperationalMatrix m1 = operational_matrix(BasisKind::Legendre, 3, 1);
    for (int rep = 0; rep < 50; ++rep) {
        const double t = rng.uniform(-1.0, 1.0);
        const PolyVector p = eval_basis(BasisKind::Legendre, 3, t);
        std::vector<double> dp;
        apply_operational_matrix(m1, p.values, dp);
        CHECK(dp[3] == doctest::Approx((15.0 * t * t - 3.0) / 2.0).epsilon(1e-13));
    }
}

TEST_CASE("basis_derivatives examples") {
    const auto leg = basis_derivatives(BasisKind::Legendre, 2, 0.0, 1);
    REQUIRE(leg.size() == 2);
    CHECK(leg[0] == std::vector<double>{1.0, 0.0, -0.5});
    CHECK(leg[1] == std::vector<double>{0.0, 1.0, 0.0});

    // C_n'(1) = n^2
    const auto che = basis_derivatives(BasisKind::Chebyshev, 3, 1.0, 1);
    CHECK(che[1][3] == doctest::Approx(9.0).epsilon(1e-14));

    const auto zeroth = basis_derivatives(BasisKind::Chebyshev, 5, 0.3, 0);
    REQUIRE(zeroth.size() == 1);
    CHECK(zeroth[0] == eval_basis(BasisKind::Chebyshev, 5, 0.3).values);
}

TEST_CASE("matrix derivative matches finite differences") {
    // Near t = +-1 the order-12 third derivatives reach ~2e5, so the
    // three-point stencil at h = 1e-5 truncates at ~3e-6; the fourth-order
    // central stencil keeps the oracle noise far below the 1e-6 bound.
    Rng rng(23);
    const int order = 12;
    const double h = 1e-5;
    for (const BasisKind basis : {BasisKind::Legendre, BasisKind::Chebyshev}) {
        const OperationalMatrix m1 = operational_matrix(basis, order, 1);
        for (int rep = 0; rep < 1000; ++rep) {
            const double t = rng.uniform(-1.0, 1.0);
            const PolyVector p = eval_basis(basis, order, t);
            std::vector<double> dp;
            apply_operational_matrix(m1, p.values, dp);
            for (int i = 0; i <= order; ++i) {
                const auto fi = [&](double tt) {
                    return eval_basis(basis, order, tt).values[static_cast<std::size_t>(i)];
                };
                const double fd = fsnet::testing::central_d1_4th(fi, t, h);
                CHECK(std::abs(dp[static_cast<std::size_t>(i)] - fd) <= 1e-6);
            }
        }
    }
}

TEST_CASE("Sturm-Liouville residuals vanish") {
    Rng rng(31);
    const int order = 12;
    for (const BasisKind basis : {BasisKind::Legendre, BasisKind::Chebyshev}) {
        const OperationalMatrix m1 = operational_matrix(basis, order, 1);
        const OperationalMatrix m2 = operational_matrix(basis, order, 2);
        for (int rep = 0; rep < 200; ++rep) {
            const double t = rng.uniform(-0.999, 0.999);
            const PolyVector p = eval_basis(basis, order, t);
            std::vector<double> d1, d2;
            apply_operational_matrix(m1, p.values, d1);
            apply_operational_matrix(m2, p.values, d2);
            for (int n = 0; n <= order; ++n) {
                const std::size_t k = static_cast<std::size_t>(n);
                const double res =
                    basis == BasisKind::Legendre
                        ? (1.0 - t * t) * d2[k] - 2.0 * t * d1[k] + n * (n + 1.0) * p.values[k]
                        : (1.0 - t * t) * d2[k] - t * d1[k] +
                              static_cast<double>(n) * n * p.values[k];
                CHECK(std::abs(res) <= 1e-8);
            }
        }
    }
}

TEST_CASE("orthogonality under the matching quadrature") {
    // 64-point Gauss-Legendre is exact far beyond the degrees probed here.
    const auto [nodes, weights] = fsnet::testing::gauss_legendre(64);
    for (int m = 0; m <= 10; ++m) {
        for (int n = 0; n <= 10; ++n) {
            double acc = 0.0;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const PolyVector p = eval_basis(BasisKind::Legendre, 10, nodes[q]);
                acc += weights[q] * p.values[static_cast<std::size_t>(m)] *
                       p.values[static_cast<std::size_t>(n)];
            }
            const double expected = m == n ? 2.0 / (2.0 * n + 1.0) : 0.0;
            CHECK(std::abs(acc - expected) <= 1e-10);
        }
    }

    // Gauss-Chebyshev: nodes cos((2k-1)pi/2K), uniform weight pi/K
    const int K = 64;
    for (int m = 0; m <= 10; ++m) {
        for (int n = 0; n <= 10; ++n) {
            double acc = 0.0;
            for (int q = 1; q <= K; ++q) {
                const double t = std::cos((2.0 * q - 1.0) * M_PI / (2.0 * K));
                const PolyVector p = eval_basis(BasisKind::Chebyshev, 10, t);
                acc += (M_PI / K) * p.values[static_cast<std::size_t>(m)] *
                       p.values[static_cast<std::size_t>(n)];
            }
            const double expected = m != n ? 0.0 : (m == 0 ? M_PI : M_PI / 2.0);
            CHECK(std::abs(acc - expected) <= 1e-10);
        }
    }
}

TEST_CASE("endpoint values") {
    const PolyVector lp = eval_basis(BasisKind::Legendre, 20, 1.0);
    const PolyVector lm = eval_basis(BasisKind::Legendre, 20, -1.0);
    const PolyVector cp = eval_basis(BasisKind::Chebyshev, 20, 1.0);
    const PolyVector cm = eval_basis(BasisKind::Chebyshev, 20, -1.0);
    for (int n = 0; n <= 20; ++n) {
        const std::size_t k = static_cast<std::size_t>(n);
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        CHECK(lp.values[k] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cp.values[k] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lm.values[k] == doctest::Approx(sign).epsilon(1e-12));
        CHECK(cm.values[k] == doctest::Approx(sign).epsilon(1e-12));
    }
}

TEST_CASE("precondition violations throw") {
    CHECK_THROWS_AS(operational_matrix(BasisKind::Legendre, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(operational_matrix(BasisKind::Legendre, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(basis_derivatives(BasisKind::Legendre, 5, 0.0, -1), std::invalid_argument);
}
