#include "oracles.hpp"
#include "robinwg/errors.hpp"
#include "robinwg/quadrature.hpp"
#include "robinwg/transverse.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace robinwg;
using oracle::pi;

TEST_CASE("dispersion closed-form values") {
    CHECK(std::abs(dispersion(pi * pi / 4, {pi / 2, 1.0})) < 1e-14);
    CHECK(std::abs(dispersion(9 * pi * pi / 4, {3 * pi / 2, 1.0})) < 1e-13);
    CHECK(dispersion(pi * pi, {1.0, 1.0}) == doctest::Approx(-2 * pi).epsilon(1e-14));
}

TEST_CASE("factorization identity holds pointwise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double alpha = std::pow(10.0, -2.0 + 4.0 * u(rng));
        const double d = 0.2 + 3.0 * u(rng);
        const double k = 20.0 * u(rng) / d;
        const double lhs = 2 * alpha * k * std::cos(k * d) + (alpha * alpha - k * k) * std::sin(k * d);
        const double rhs = 2 * (k * std::cos(k * d / 2) + alpha * std::sin(k * d / 2)) *
                           (alpha * std::cos(k * d / 2) - k * std::sin(k * d / 2));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(alpha * alpha + k * k));
    }
}

TEST_CASE("eigenvalues match the half-angle factor roots") {
    const auto es = transversal_eigenvalues({1.0, 1.0}, 3);
    const auto ref = oracle::factor_energies(1.0, 1.0, 3);
    for (int i = 0; i < 3; ++i) CHECK(es[i] == doctest::Approx(ref[i]).epsilon(1e-10));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const double d = std::pow(10.0, -1.0 + 2.0 * u(rng));
        const double alpha = std::pow(10.0, -3.0 + 6.0 * u(rng)) / d;
        const auto got = transversal_eigenvalues({alpha, d}, 6);
        const auto want = oracle::factor_energies(alpha, d, 6);
        for (int i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
}

TEST_CASE("closed-form roots") {
    CHECK(transversal_eigenvalues({pi / 2, 1.0}, 1)[0] == doctest::Approx(pi * pi / 4).epsilon(1e-12));
    const auto two = transversal_eigenvalues({3 * pi / 2, 1.0}, 2);
    CHECK(two[0] > 0.0);
    CHECK(two[0] < pi * pi);
    CHECK(two[1] == doctest::Approx(9 * pi * pi / 4).epsilon(1e-12));
}

TEST_CASE("bracketing and monotonicity in alpha") {
    const double d = 1.3;
    std::vector<double> prev;
    for (int i = 0; i < 40; ++i) {
        const double alpha = std::pow(10.0, -3.0 + 6.0 * i / 39.0);
        const auto es = transversal_eigenvalues({alpha, d}, 8);
        for (int n = 1; n <= 8; ++n) {
            CHECK(es[n - 1] > std::pow((n - 1) * pi / d, 2));
            CHECK(es[n - 1] < std::pow(n * pi / d, 2));
            if (!prev.empty()) CHECK(es[n - 1] > prev[n - 1]);
        }
        prev = es;
    }
}

TEST_CASE("small-alpha and Dirichlet limits") {
    for (double alpha : {1e-5, 1e-4}) {
        const double e1 = transversal_eigenvalues({alpha, 1.0}, 1)[0];
        CHECK(std::abs(e1 / (2 * alpha) - 1.0) <= 0.01);
    }
    CHECK(transversal_eigenvalues({1e4, 1.0}, 1)[0] == doctest::Approx(pi * pi).epsilon(0.01));
    // alpha d far above 1e8 stays representable
    const auto big = transversal_eigenvalues({1e12, 1.0}, 2);
    CHECK(big[1] == doctest::Approx(4 * pi * pi).epsilon(1e-10));
}

TEST_CASE("mode normalization, boundary conditions and symmetry") {
    for (double alpha : {0.01, 1.0, 20.0, 1e5}) {
        const RobinCrossSection cs{alpha, 1.7};
        for (const auto& m : transversal_modes(cs, 6)) {
            const auto sq = [&m](double y) { return m(y) * m(y); };
            CHECK(quad::composite_gauss(sq, 0.0, cs.d, 8) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(mode_eval(m, 0.0) == doctest::Approx(m.norm_const()).epsilon(1e-15));
            CHECK(m.norm_const() > 0.0);
            double sup = 0.0;
            for (int i = 0; i <= 200; ++i) sup = std::max(sup, std::abs(m(cs.d * i / 200)));
            const double bc_tol = 1e-9 * std::max(1.0, alpha) * sup;
            CHECK(std::abs(-m.derivative(0.0) + alpha * m(0.0)) <= bc_tol);
            CHECK(std::abs(m.derivative(cs.d) + alpha * m(cs.d)) <= bc_tol);
            const double sign = m.index() % 2 == 1 ? 1.0 : -1.0;
            for (double y : {0.0, 0.1, 0.77, 1.2}) CHECK(std::abs(m(cs.d - y) - sign * m(y)) <= 1e-10 * sup);
        }
    }
}

TEST_CASE("raw square integral agrees with quadrature") {
    for (double alpha : {0.3, 5.0, 200.0}) {
        const RobinCrossSection cs{alpha, 1.0};
        for (int n = 1; n <= 4; ++n) {
            const double k = transversal_wavenumber(cs, n);
            const auto g = [&](double y) { const double v = alpha / k * std::sin(k * y) + std::cos(k * y); return v * v; };
            CHECK(TransversalMode::raw_square_integral(k, cs) == doctest::Approx(quad::gauss(g, 0.0, 1.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("alpha = pi/2 ground state at y = 1/2") {
    const auto m = transversal_mode({pi / 2, 1.0}, 1);
    CHECK(m.wavenumber() == doctest::Approx(pi / 2).epsilon(1e-13));
    CHECK(mode_eval(m, 0.5) == doctest::Approx(m.norm_const() * std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("overlaps: orthonormality, parity, Green's identity, Parseval") {
    const RobinCrossSection in{5.0, 1.0};
    const RobinCrossSection out{20.0, 1.0};
    const auto mi = transversal_modes(in, 8);
    const auto mo = transversal_modes(out, 200);
    for (int n = 0; n < 8; ++n) {
        CHECK(overlap(mi[n], mi[n]) == doctest::Approx(1.0).epsilon(1e-12));
        for (int m = 0; m < 8; ++m) {
            if (m != n) CHECK(std::abs(overlap(mi[n], mi[m])) < 1e-12);
            const double o = overlap(mi[n], mo[m]);
            if ((m + n) % 2 == 1) {
                CHECK(std::abs(o) < 1e-12);
            } else {
                CHECK(o == doctest::Approx(oracle::green_overlap(mi[n], mo[m])).epsilon(1e-10).scale(1e-3));
            }
        }
    }
    for (int n = 0; n < 3; ++n) {
        double sum = 0.0;
        for (const auto& m : mo) sum += overlap(mi[n], m) * overlap(mi[n], m);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("near-degenerate overlap uses the quadrature path continuously") {
    const auto a = transversal_mode({20.0, 1.0}, 1);
    const auto b = transversal_mode({20.0 * (1 + 1e-9), 1.0}, 1);
    const auto prod = [&](double y) { return a(y) * b(y); };
    CHECK(overlap(a, b) == doctest::Approx(quad::composite_gauss(prod, 0.0, 1.0, 4)).epsilon(1e-13));
    CHECK(overlap(a, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contract errors") {
    CHECK_THROWS_AS(transversal_eigenvalues({-1.0, 1.0}, 2), ContractError);
    CHECK_THROWS_AS(transversal_eigenvalues({1.0, 0.0}, 2), ContractError);
    CHECK_THROWS_AS(transversal_eigenvalues({1.0, 1.0}, 0), ContractError);
    CHECK_THROWS_AS(dispersion(-1.0, {1.0, 1.0}), ContractError);
    const auto m = transversal_mode({1.0, 1.0}, 1);
    CHECK_THROWS_AS(mode_eval(m, 1.5), ContractError);
    CHECK_THROWS_AS(mode_eval(m, -1e-3), ContractError);
    const auto other = transversal_mode({1.0, 2.0}, 1);
    CHECK_THROWS_AS(overlap(m, other), WidthMismatchError);
}
