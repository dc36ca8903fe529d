// SPDX-License-Identifier: Apache-2.0
#include "divbar/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "divbar/config.hpp"

namespace divbar {

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_barriers_csv(std::ostream& os, std::vector<BarrierRow> const& rows)
{
    os << "state,subsidiary,m,C\n";
    for (auto const& r : rows) {
        os << r.state << ',' << r.subsidiary << ',' << format_number(r.m) << ',' << format_number(r.C) << '\n';
    }
}

void write_value_grid_csv(std::ostream& os, PolicySolution const& sol, int points)
{
    int const n = sol.size();
    int const pts = std::max(2, points);
    os << "state";
    for (int i = 0; i < n; ++i) os << ",x" << i + 1;
    os << ",f\n";

    std::vector<double> x(static_cast<std::size_t>(n));
    auto const emit = [&](DefaultState const& z) {
        os << z.bits();
        for (double v : x) os << ',' << format_number(v);
        os << ',' << format_number(value(sol, x, z)) << '\n';
    };

    for (std::uint32_t mask = 0; mask < sol.params().state_count(); ++mask) {
        DefaultState const z(n, mask);
        auto const alive = surviving(z);
        if (alive.empty()) continue;
        std::fill(x.begin(), x.end(), 0.0);
        std::vector<double> top;
        for (int i : alive) top.push_back(sol.barrier(i, z) + 1.0);

        if (alive.size() > 3) {
            for (int q = 0; q < pts; ++q) {
                double const t = static_cast<double>(q) / (pts - 1);
                for (std::size_t j = 0; j < alive.size(); ++j) x[static_cast<std::size_t>(alive[j])] = t * top[j];
                emit(z);
            }
            continue;
        }
        std::vector<int> idx(alive.size(), 0);
        while (true) {
            for (std::size_t j = 0; j < alive.size(); ++j) {
                x[static_cast<std::size_t>(alive[j])] = top[j] * idx[j] / (pts - 1);
            }
            emit(z);
            std::size_t d = 0;
            while (d < idx.size() && ++idx[d] == pts) idx[d++] = 0;
            if (d == idx.size()) break;
        }
    }
}

void write_report_csv(std::ostream& os, VerificationReport const& report)
{
    os << "check,max_violation,tolerance,passed,hard,location\n";
    for (auto const& e : report.entries) {
        os << e.name << ',' << format_number(e.max_violation) << ',' << format_number(e.tolerance) << ','
           << (e.passed ? "true" : "false") << ',' << (e.hard ? "true" : "false") << ',';
        // Locations contain commas inside x=(...); swap them for spaces.
        for (char ch : e.location) os << (ch == ',' ? ' ' : ch);
        os << '\n';
    }
}

void write_sim_csv(std::ostream& os, std::vector<PolicyComparisonRow> const& rows, int n)
{
    os << "policy_scale,estimate,std_error";
    for (int i = 0; i < n; ++i) os << ",sub" << i + 1;
    os << '\n';
    for (auto const& r : rows) {
        os << format_number(r.scale) << ',' << format_number(r.result.estimate) << ','
           << format_number(r.result.std_error);
        for (double v : r.result.per_subsidiary) os << ',' << format_number(v);
        os << '\n';
    }
}

void write_comparison_csv(std::ostream& os, std::vector<ComparisonRow> const& rows)
{
    os << "function,x_max,points,max_abs_diff\n";
    for (auto const& r : rows) {
        os << r.function << ',' << format_number(r.x_max) << ',' << r.points << ',' << format_number(r.max_abs_diff)
           << '\n';
    }
}

std::string policy_to_json(PolicySolution const& sol)
{
    using nlohmann::json;
    json out;
    out["params"] = json::parse(params_to_json(sol.params()));
    json comps = json::array();
    int const n = sol.size();
    for (std::uint32_t mask = 0; mask < sol.params().state_count(); ++mask) {
        DefaultState const z(n, mask);
        for (int i : surviving(z)) {
            auto const& c = sol.component(i, z);
            comps.push_back({{"state", z.bits()},
                             {"subsidiary", i + 1},
                             {"m", c.m},
                             {"C", c.C},
                             {"f", json::parse(to_json(c.f))}});
        }
    }
    out["components"] = std::move(comps);
    return out.dump(2) + "\n";
}

}  // namespace divbar
