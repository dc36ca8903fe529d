// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <chrono>
#include <random>

#include "divbar/errors.hpp"
#include "divbar/recursion.hpp"
#include "divbar/vi_solver.hpp"
#include "support.hpp"

using namespace divbar;

namespace {

// Level-1 solution of subsidiary 1 in the example, scaled by lambda_2(0,0) as
// it enters the both-alive source.
ExpPolyPiecewise example_source()
{
    OperatorCoeffs const c{0.05 + 0.04, 0.1, 0.07, 0.4};
    return scale(solve_vi(c, ExpPolyPiecewise::zero()).f, 0.01);
}

}  // namespace

TEST_SUITE("vi_solver")
{
    TEST_CASE("characteristic roots")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> mu(0.01, 0.5), nu(0.01, 0.5), sig(0.01, 0.5);
        for (int k = 0; k < 200; ++k) {
            OperatorCoeffs const c{mu(rng), nu(rng), sig(rng), 0.5};
            for (double t : {c.theta1(), -c.theta2()}) {
                double const terms = std::abs(0.5 * c.sigma * c.sigma * t * t) + std::abs(c.nu * t) + c.mu;
                CHECK(std::abs(0.5 * c.sigma * c.sigma * t * t + c.nu * t - c.mu) <= 1e-12 * terms);
            }
            CHECK(c.theta1() > 0.0);
            CHECK(c.theta2() > c.theta1());
        }
        // Tiny mu: the stable form keeps theta1 accurate where -nu + sqrt(...) cancels.
        OperatorCoeffs const tiny{1e-14, 1.0, 1.0, 1.0};
        CHECK(tiny.theta1() == doctest::Approx(1e-14).epsilon(1e-10));
    }

    TEST_CASE("zero source: phi pair")
    {
        OperatorCoeffs const c{0.09, 0.1, 0.07, 0.4};
        auto const phis = build_phi(c, ExpPolyPiecewise::zero());
        CHECK(phis.phi1.is_zero());
        CHECK(phis.phi2.deriv(1)(0.0) == doctest::Approx(c.theta1() + c.theta2()));
        double const q0 = smooth_fit_q(c, phis, 0.0);
        CHECK(q0 == doctest::Approx(c.gamma * phis.phi2.deriv(2)(0.0) / phis.phi2.deriv(1)(0.0)));
        CHECK(q0 < 0.0);
    }

    TEST_CASE("example barrier in the one-survivor state")
    {
        auto const t0 = std::chrono::steady_clock::now();
        OperatorCoeffs const c{0.05 + 0.04, 0.1, 0.07, 0.4};
        auto const sol = solve_vi(c, ExpPolyPiecewise::zero());
        testing::SingleLineOracle const o(0.1, 0.07, 0.09, 0.4);
        CHECK(o.m == doctest::Approx(0.18118).epsilon(1e-4));
        CHECK(std::abs(sol.m - o.m) <= 1e-10);
        CHECK(std::abs(sol.C - o.gamma * o.C) <= 1e-10);
        CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
    }

    TEST_CASE("closed form reproduced for random coefficients")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> mu(0.02, 0.3), nu(0.02, 0.4), sig(0.02, 0.4), gam(0.05, 1.0);
        double worst_m = 0.0, worst_C = 0.0, worst_f = 0.0;
        for (int k = 0; k < 100; ++k) {
            OperatorCoeffs const c{mu(rng), nu(rng), sig(rng), gam(rng)};
            testing::SingleLineOracle const o(c.nu, c.sigma, c.mu, c.gamma);
            auto const sol = solve_vi(c, ExpPolyPiecewise::zero());
            worst_m = std::max(worst_m, std::abs(sol.m - o.m));
            worst_C = std::max(worst_C, std::abs(sol.C - c.gamma * o.C));
            for (int q = 0; q < 100; ++q) {
                double const x = (o.m + 1.0) * q / 99.0;
                worst_f = std::max(worst_f, std::abs(sol.f(x) - o.f(x)));
            }
        }
        CHECK(worst_m <= 1e-10);
        CHECK(worst_C <= 1e-10);
        CHECK(worst_f <= 1e-10);
    }

    TEST_CASE("particular solution starts flat and stays nonpositive")
    {
        OperatorCoeffs const c{0.05 + 0.03, 0.1, 0.07, 0.4};
        auto const h = example_source();
        auto const phis = build_phi(c, h);
        CHECK(std::abs(phis.phi1(0.0)) <= 1e-13);
        CHECK(std::abs(phis.phi1.deriv(1)(0.0)) <= 1e-13);
        CHECK(std::abs(phis.phi1.deriv(2)(0.0)) <= 1e-13);
        for (int q = 0; q <= 400; ++q) {
            double const x = 2.0 * q / 400.0;
            CHECK(phis.phi1(x) <= 1e-15);
            CHECK(phis.phi1.deriv(1)(x) <= 1e-15);
        }
    }

    TEST_CASE("assembled solution invariants")
    {
        OperatorCoeffs const c{0.05 + 0.03, 0.1, 0.07, 0.4};
        auto const sol = solve_vi(c, example_source());
        auto const d1 = sol.f.deriv(1);
        auto const d2 = sol.f.deriv(2);
        CHECK(std::abs(sol.f(0.0)) <= 1e-15);
        CHECK(std::abs(d1.eval(sol.m, Side::left) - c.gamma) <= 1e-8);
        CHECK(std::abs(d2.eval(sol.m, Side::left)) <= 1e-6);
        CHECK(sol.C > 0.0);
        CHECK(sol.f.breakpoints().back() == sol.m);

        auto const gen = c.apply(sol.f);
        double worst = 0.0;
        for (int q = 0; q < 500; ++q) {
            double const x = 2.0 * (sol.m + 1.0) * q / 499.0;
            double const g = gen(x) + sol.h(x);
            double const grad = c.gamma - d1(x);
            worst = std::max(worst, std::abs(vi_residual(sol, x)));
            CHECK(d2(x) <= 1e-10);
            CHECK(d1(x) > 0.0);
            if (x < sol.m) {
                CHECK(std::abs(g) <= 1e-7);   // generator branch active
                CHECK(grad <= 1e-7);
            } else {
                CHECK(std::abs(grad) <= 1e-7);  // gradient branch active
                CHECK(g <= 1e-7);
            }
        }
        CHECK(worst <= 1e-7);
    }

    TEST_CASE("a stronger killing rate lowers the barrier")
    {
        auto const h = example_source();
        double prev = INFINITY;
        for (double mu = 0.06; mu <= 0.5; mu += 0.02) {
            auto const sol = solve_vi({mu, 0.1, 0.07, 0.4}, h);
            CHECK(sol.m <= prev);
            prev = sol.m;
        }
    }

    TEST_CASE("source admissibility is enforced")
    {
        OperatorCoeffs const c{0.08, 0.1, 0.07, 0.4};
        auto const shifted = ExpPolyPiecewise::whole(ExpPolyPiece::affine(0.1, 1.0));
        CHECK_THROWS_AS(build_phi(c, shifted), ContractViolation);
        auto const decreasing = ExpPolyPiecewise::whole(ExpPolyPiece::affine(0.0, -1.0));
        CHECK_THROWS_AS(build_phi(c, decreasing), ContractViolation);
        auto const convex = ExpPolyPiecewise::whole(ExpPolyPiece({{1.0, 0, 2.0}, {-1.0, 0, 0.0}}));
        CHECK_THROWS_AS(build_phi(c, convex), ContractViolation);
        CHECK_THROWS_AS(solve_vi({0.0, 0.1, 0.07, 0.4}, ExpPolyPiecewise::zero()), ContractViolation);
    }

    TEST_CASE("a wrong boundary fails assembly with the check named")
    {
        OperatorCoeffs const c{0.09, 0.1, 0.07, 0.4};
        auto const phis = build_phi(c, ExpPolyPiecewise::zero());
        auto const b = find_boundary(c, phis);
        try {
            assemble(c, ExpPolyPiecewise::zero(), phis, {b.m * 1.05, b.C});
            FAIL("expected ConstructionError");
        } catch (ConstructionError const& e) {
            CHECK((e.check() == "smooth_fit_slope" || e.check() == "smooth_fit_curvature"));
        }
    }

    TEST_CASE("a source that breaks the hypotheses yields no boundary")
    {
        // A convex source growing faster than e^{theta1 x} keeps q negative
        // until the scan leaves the representable range.
        OperatorCoeffs const c{0.08, 0.1, 0.07, 0.4};
        SolverSettings s;
        s.check_admissibility = false;
        double const k = 5.0 * c.theta1();
        auto const bad = ExpPolyPiecewise::whole(ExpPolyPiece({{1.0, 0, k}, {-1.0, 0, 0.0}}));
        CHECK_THROWS_AS(solve_vi(c, bad, s), NoBoundaryError);
    }
}
