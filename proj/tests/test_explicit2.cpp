// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "divbar/errors.hpp"
#include "divbar/explicit2.hpp"
#include "divbar/recursion.hpp"
#include "support.hpp"

using namespace divbar;

TEST_SUITE("explicit2")
{
    TEST_CASE("example: smooth fit of the one-survivor branch")
    {
        auto const res = solve_explicit2(testing::fig1());
        REQUIRE(res.solution);
        auto const& c = res.solution->parts[0];
        CHECK(c.single(c.m_single, 1) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(std::abs(c.single(c.m_single, 2)) < 1e-10);
        CHECK(c.m_single == doctest::Approx(0.18118).epsilon(1e-4));
        for (auto const& part : res.solution->parts) {
            CHECK(part.f2(0.0) == 0.0);
            CHECK(std::isfinite(part.K));
            CHECK(part.m_both >= part.m_single);
        }
    }

    TEST_CASE("roots solve their characteristic equations")
    {
        auto const p = testing::fig1();
        auto const res = solve_explicit2(p);
        REQUIRE(res.solution);
        DefaultState const z00(2, 0u);
        for (int i = 0; i < 2; ++i) {
            auto const& c = res.solution->parts[static_cast<std::size_t>(i)];
            double const a = p.drift[static_cast<std::size_t>(i)], b = p.vol[static_cast<std::size_t>(i)];
            double const mu_hat = p.discount + p.lambda(i, DefaultState(2, 1u << (1 - i)));
            double const mu = p.killing_rate(z00);
            auto const resid = [&](double t, double m) { return (0.5 * b * b * t * t + a * t - m) / m; };
            CHECK(std::abs(resid(c.theta_hat1, mu_hat)) <= 1e-12);
            CHECK(std::abs(resid(-c.theta_hat2, mu_hat)) <= 1e-12);
            CHECK(std::abs(resid(c.theta1, mu)) <= 1e-12);
            CHECK(std::abs(resid(-c.theta2, mu)) <= 1e-12);
        }
    }

    TEST_CASE("the two particular-solution branches join smoothly")
    {
        std::mt19937_64 rng(21);
        for (int k = 0; k < 20; ++k) {
            auto const res = solve_explicit2(testing::random_two_line(rng));
            if (!res.solution) continue;
            for (auto const& c : res.solution->parts) {
                double const m = c.m_single;
                for (int order = 0; order <= 2; ++order) {
                    double const l = c.f11(m, order), r = c.f12(m, order);
                    CHECK(std::abs(l - r) <= 1e-9 * std::max(1.0, std::abs(l)));
                }
            }
        }
    }

    TEST_CASE("generic recursion agrees with the explicit formulas")
    {
        std::mt19937_64 rng(22);
        std::vector<ModelParams> cases{testing::fig1()};
        for (int k = 0; k < 20; ++k) cases.push_back(testing::random_two_line(rng));
        for (auto const& p : cases) {
            auto const res = solve_explicit2(p);
            REQUIRE(res.solution);
            auto const rows = compare_explicit2(solve_all(p), *res.solution, 200);
            REQUIRE(rows.size() == 4);
            for (auto const& r : rows) {
                CAPTURE(r.function);
                CHECK(r.max_abs_diff <= 1e-6);
            }
        }
    }

    TEST_CASE("colliding roots make the oracle unavailable")
    {
        // lambda_1(0,1) = lambda_1(0,0) + lambda_2(0,0) gives theta_hat = theta for line 1.
        auto const p = testing::two_line(0.1, 0.15, 0.07, 0.06, 0.05, 0.4, 0.02, 0.01, 0.03, 0.04);
        auto const res = solve_explicit2(p);
        CHECK_FALSE(res.solution);
        CHECK(res.unavailable_reason.find("subsidiary 1") != std::string::npos);
        // The generic pipeline handles the resonance.
        CHECK_NOTHROW(solve_all(p));
    }

    TEST_CASE("requires two lines")
    {
        CHECK_THROWS_AS(solve_explicit2(testing::one_line(0.1, 0.1, 0.05, 0.01)), ContractViolation);
    }
}
