// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "divbar/errors.hpp"
#include "divbar/model.hpp"
#include "support.hpp"

using namespace divbar;

TEST_SUITE("model")
{
    TEST_CASE("example parameter set is valid")
    {
        CHECK(validate(testing::fig1()).empty());
        CHECK_NOTHROW(require_valid(testing::fig1()));
    }

    TEST_CASE("weights must sum to one")
    {
        auto p = testing::fig1();
        p.weights = {0.4, 0.5};
        auto const v = validate(p);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == "weights");
        CHECK_THROWS_AS(require_valid(p), ContractViolation);
    }

    TEST_CASE("intensity must not drop after a default")
    {
        auto p = testing::fig1();
        p.intensity[2][0] = 0.01;  // lambda_1(0,1) below lambda_1(0,0) = 0.02
        auto const v = validate(p);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field.find("intensity") != std::string::npos);
    }

    TEST_CASE("positivity and correlation checks")
    {
        auto p = testing::fig1();
        p.drift[1] = 0.0;
        p.vol[0] = -1.0;
        p.discount = 0.0;
        CHECK(validate(p).size() == 3);

        auto q = testing::fig1();
        q.corr = {{1.0, 0.5}, {0.4, 1.0}};
        CHECK(validate(q).size() == 1);

        auto s = testing::fig1();
        s.intensity[0][1] = 0.0;
        CHECK_FALSE(validate(s).empty());

        ModelParams three;
        three.n = 3;
        three.drift = {0.1, 0.1, 0.1};
        three.vol = {0.1, 0.1, 0.1};
        three.discount = 0.05;
        three.weights = {0.2, 0.3, 0.5};
        three.intensity = expand_intensity_rule({0.01, 0.01, 0.01}, 2.0);
        // Pairwise feasible, jointly not PSD.
        three.corr = {{1.0, 0.9, -0.9}, {0.9, 1.0, 0.9}, {-0.9, 0.9, 1.0}};
        auto const v = validate(three);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == "corr");
        CHECK_THROWS_AS(cholesky(three.corr), ContractViolation);
    }

    TEST_CASE("cholesky accepts singular correlation")
    {
        auto const L = cholesky({{1.0, 1.0}, {1.0, 1.0}});
        CHECK(L[0] == doctest::Approx(1.0));
        CHECK(L[2] == doctest::Approx(1.0));
        CHECK(std::abs(L[3]) < 1e-4);
        auto const M = cholesky({{1.0, 0.3}, {0.3, 1.0}});
        CHECK(M[2] * M[2] + M[3] * M[3] == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("surviving lists alive subsidiaries in order")
    {
        CHECK(surviving(DefaultState::from_bits("00")) == std::vector<int>{0, 1});
        CHECK(surviving(DefaultState::from_bits("10")) == std::vector<int>{1});
        CHECK(surviving(DefaultState::from_bits("101")) == std::vector<int>{1});
        CHECK(surviving(DefaultState::all_defaulted(4)).empty());
    }

    TEST_CASE("bitstrings put subsidiary 1 first")
    {
        auto const z = DefaultState::from_bits("01");
        CHECK(z.alive(0));
        CHECK(z.defaulted(1));
        CHECK(z.mask() == 2u);
        CHECK(z.bits() == "01");
        CHECK(z.defaulted_count() == 1);
        CHECK(z.with_default(0).bits() == "11");
        CHECK_THROWS_AS(z.with_default(1), ContractViolation);
        CHECK_THROWS(DefaultState::from_bits("0a"));
    }

    TEST_CASE("states_by_defaults groups")
    {
        auto const g1 = states_by_defaults(1);
        REQUIRE(g1.size() == 2);
        CHECK(g1[0][0].bits() == "1");
        CHECK(g1[1][0].bits() == "0");

        auto const g2 = states_by_defaults(2);
        REQUIRE(g2.size() == 3);
        CHECK(g2[0].size() == 1);
        CHECK(g2[0][0].bits() == "11");
        CHECK(g2[1].size() == 2);
        CHECK(g2[2][0].bits() == "00");

        auto const g3 = states_by_defaults(3);
        std::vector<std::size_t> sizes;
        for (auto const& g : g3) sizes.push_back(g.size());
        CHECK(sizes == std::vector<std::size_t>{1, 3, 3, 1});

        for (int n = 1; n <= 8; ++n) {
            std::set<std::uint32_t> seen;
            int k = n;
            for (auto const& g : states_by_defaults(n)) {
                for (auto const& z : g) {
                    CHECK(z.defaulted_count() == k);
                    seen.insert(z.mask());
                }
                --k;
            }
            CHECK(seen.size() == (std::size_t{1} << n));
        }
    }

    TEST_CASE("rule-based intensities are monotone along default chains")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> base(0.001, 0.1), factor(1.0, 3.0);
        for (int n = 1; n <= 6; ++n) {
            std::vector<double> b(static_cast<std::size_t>(n));
            for (auto& v : b) v = base(rng);
            ModelParams p;
            p.n = n;
            p.drift.assign(b.size(), 0.1);
            p.vol.assign(b.size(), 0.1);
            p.discount = 0.05;
            p.weights.assign(b.size(), 1.0 / n);
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < b.size(); ++i) s += p.weights[i];
            p.weights.back() = 1.0 - s;
            p.corr.assign(b.size(), std::vector<double>(b.size(), 0.0));
            for (std::size_t i = 0; i < b.size(); ++i) p.corr[i][i] = 1.0;
            p.intensity = expand_intensity_rule(b, factor(rng));
            CHECK(validate(p).empty());

            // Brute force over every pair z <= z'.
            for (std::uint32_t lo = 0; lo < p.state_count(); ++lo) {
                for (std::uint32_t hi = 0; hi < p.state_count(); ++hi) {
                    if ((lo & hi) != lo) continue;
                    DefaultState const zl(n, lo), zh(n, hi);
                    for (int i = 0; i < n; ++i) {
                        if (zh.alive(i)) CHECK(p.lambda(i, zl) <= p.lambda(i, zh));
                    }
                }
            }
        }
    }

    TEST_CASE("killing rate sums surviving intensities")
    {
        auto const p = testing::fig1();
        CHECK(p.killing_rate(DefaultState::from_bits("00")) == doctest::Approx(0.08));
        CHECK(p.killing_rate(DefaultState::from_bits("01")) == doctest::Approx(0.09));
        CHECK(p.killing_rate(DefaultState::from_bits("11")) == doctest::Approx(0.05));
    }
}
