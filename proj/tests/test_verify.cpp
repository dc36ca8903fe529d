// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "divbar/config.hpp"
#include "divbar/recursion.hpp"
#include "divbar/verify.hpp"
#include "support.hpp"

using namespace divbar;

namespace {

// Rebuild a solution with f_i(., z) of one component scaled by `factor`.
PolicySolution tampered(PolicySolution const& sol, int i, DefaultState const& z, double factor)
{
    int const n = sol.size();
    std::vector<std::optional<VISolution>> table(sol.params().state_count() * static_cast<std::size_t>(n));
    for (std::uint32_t mask = 0; mask < sol.params().state_count(); ++mask) {
        DefaultState const s(n, mask);
        for (int j : surviving(s)) {
            auto c = sol.component(j, s);
            if (j == i && s == z) c.f = scale(c.f, factor);
            table[mask * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = c;
        }
    }
    return PolicySolution(sol.params(), std::move(table));
}

}  // namespace

TEST_SUITE("verify")
{
    TEST_CASE("example passes every hard check")
    {
        auto const rep = verify_all(solve_all(testing::fig1()));
        CHECK_FALSE(rep.hard_failure());
        std::set<std::string> names;
        for (auto const& e : rep.entries) {
            CAPTURE(e.name);
            CAPTURE(e.location);
            CHECK(e.passed);
            CHECK(names.insert(e.name).second);  // each check listed once
        }
        REQUIRE(rep.find("hjbvi.terms_upper"));
        REQUIRE(rep.find("ordering.m1(00)>=m1(01)"));
        REQUIRE(rep.find("derivatives.c2_at_barrier"));
        CHECK(rep.find("hjbvi.mixed_derivatives")->max_violation == 0.0);
        CHECK(rep.find("derivatives.affine_tail")->max_violation == 0.0);
    }

    TEST_CASE("coarse grid on the example")
    {
        GridSpec g;
        g.points_per_axis = 100;
        auto const rep = check_hjbvi(solve_all(testing::fig1()), g);
        CHECK(rep.find("hjbvi.terms_upper")->max_violation <= 1e-6);
        CHECK(rep.find("hjbvi.max_term_lower")->max_violation <= 1e-6);
        CHECK(rep.find("hjbvi.payout_gradient")->max_violation <= 1e-6);
    }

    TEST_CASE("one line: the defaulted state is skipped")
    {
        auto const rep = verify_all(solve_all(testing::one_line(0.1, 0.1, 0.05, 0.02)));
        CHECK_FALSE(rep.hard_failure());
        CHECK(rep.find("ordering.single_default_steps") == nullptr);
    }

    TEST_CASE("three lines: ordering is reported softly")
    {
        GridSpec g;
        g.points_per_axis = 60;
        auto const sol = solve_all(load_config(std::filesystem::path(DIVBAR_CONFIG_DIR) / "chain3.json"));
        auto const rep = verify_all(sol, g);
        CHECK_FALSE(rep.hard_failure());
        auto const* ord = rep.find("ordering.single_default_steps");
        REQUIRE(ord);
        CHECK_FALSE(ord->hard);
    }

    TEST_CASE("more survivors than the tensor limit use random points")
    {
        ModelParams p;
        p.n = 4;
        p.drift = {0.1, 0.12, 0.15, 0.09};
        p.vol = {0.07, 0.08, 0.06, 0.05};
        p.corr.assign(4, std::vector<double>(4, 0.0));
        for (std::size_t i = 0; i < 4; ++i) p.corr[i][i] = 1.0;
        p.discount = 0.05;
        p.weights = {0.25, 0.25, 0.25, 0.25};
        p.intensity = expand_intensity_rule({0.01, 0.02, 0.015, 0.01}, 1.3);
        GridSpec g;
        g.points_per_axis = 40;
        g.random_samples = 2000;
        auto const rep = check_hjbvi(solve_all(p), g);
        CHECK_FALSE(rep.hard_failure());
    }

    TEST_CASE("a perturbed value function is caught")
    {
        auto const sol = solve_all(testing::fig1());
        auto const bad = tampered(sol, 0, DefaultState::from_bits("00"), 1.001);
        auto const rep = check_hjbvi(bad);
        CHECK(rep.hard_failure());
        auto const* cont = rep.find("hjbvi.continuation_generator");
        CHECK_FALSE(cont->passed);
        CHECK(cont->location.find("state=00") != std::string::npos);
        // A lower-level error breaks its own gradient floor and the source one level up.
        auto const low = tampered(sol, 0, DefaultState::from_bits("01"), 1.001);
        CHECK(check_hjbvi(low).hard_failure());
    }

    TEST_CASE("stronger contagion widens the barrier gap")
    {
        auto const gap = [](double factor) {
            auto const p = testing::two_line(0.1, 0.15, 0.07, 0.06, 0.05, 0.4, 0.02, 0.01, 0.02 * factor, 0.04);
            auto const sol = solve_all(p);
            auto const rep = check_orderings(sol);
            CHECK_FALSE(rep.hard_failure());
            return sol.barrier(0, DefaultState::from_bits("00")) - sol.barrier(0, DefaultState::from_bits("01"));
        };
        CHECK(gap(100.0) > gap(2.0));
        CHECK(gap(2.0) > 0.0);
    }
}
