// SPDX-License-Identifier: Apache-2.0
#include "divbar/recursion.hpp"

#include <atomic>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "divbar/errors.hpp"

namespace divbar {

namespace {

std::size_t slot(int n, DefaultState const& z, int i)
{
    return static_cast<std::size_t>(z.mask()) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
}

ExpPolyPiecewise build_source(ModelParams const& params,
                              std::vector<std::optional<VISolution>> const& table, int i,
                              DefaultState const& z)
{
    ExpPolyPiecewise h;
    for (int l : surviving(z)) {
        if (l == i) continue;
        auto const& lower = table[slot(params.n, z.with_default(l), i)];
        if (!lower) throw std::logic_error("solve_all: lower-level solution missing");
        h = add(h, scale(lower->f, params.lambda(l, z)));
    }
    return h;
}

VISolution solve_one(ModelParams const& params, std::vector<std::optional<VISolution>> const& table,
                     int i, DefaultState const& z, SolverSettings const& settings)
{
    auto const ui = static_cast<std::size_t>(i);
    OperatorCoeffs const coeffs{params.killing_rate(z), params.drift[ui], params.vol[ui], params.weights[ui]};
    std::string const where = " [subsidiary " + std::to_string(i + 1) + ", state " + z.bits() + "]";
    try {
        return solve_vi(coeffs, build_source(params, table, i, z), settings);
    } catch (NoBoundaryError const& e) {
        throw NoBoundaryError(e.what() + where);
    } catch (ConstructionError const& e) {
        throw ConstructionError(e.check(), std::string(e.what()) + where);
    } catch (ContractViolation const& e) {
        throw ContractViolation(e.what() + where);
    }
}

}  // namespace

PolicySolution::PolicySolution(ModelParams params, std::vector<std::optional<VISolution>> table)
    : params_(std::move(params)), table_(std::move(table))
{
}

VISolution const& PolicySolution::component(int i, DefaultState const& z) const
{
    if (i < 0 || i >= params_.n || z.size() != params_.n || z.defaulted(i)) {
        throw ContractViolation("PolicySolution: subsidiary " + std::to_string(i + 1) +
                                " has no solution in state " + z.bits());
    }
    return *table_[slot(params_.n, z, i)];
}

double PolicySolution::component_value(int i, double x, DefaultState const& z) const
{
    if (z.defaulted(i)) return 0.0;
    return component(i, z).f(x);
}

PolicySolution solve_all(ModelParams const& params, SolverSettings const& settings, int threads)
{
    require_valid(params);
    if (params.n > 10) {
        std::cerr << "warning: n = " << params.n << " gives " << params.state_count()
                  << " default states; solving may be slow\n";
    }
    std::vector<std::optional<VISolution>> table(params.state_count() * static_cast<std::size_t>(params.n));

    for (auto const& group : states_by_defaults(params.n)) {
        std::vector<std::pair<int, DefaultState>> tasks;
        for (auto const& z : group) {
            for (int i : surviving(z)) tasks.emplace_back(i, z);
        }
        if (tasks.empty()) continue;

        int const workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
        if (workers == 1) {
            for (auto const& [i, z] : tasks) table[slot(params.n, z, i)] = solve_one(params, table, i, z, settings);
            continue;
        }
        // Workers read only the previous groups and write disjoint slots.
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < tasks.size(); k = next++) {
                    auto const& [i, z] = tasks[k];
                    try {
                        auto sol = solve_one(params, table, i, z, settings);
                        table[slot(params.n, z, i)] = std::move(sol);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }
    return PolicySolution(params, std::move(table));
}

double value(PolicySolution const& sol, std::span<double const> x, DefaultState const& z)
{
    if (static_cast<int>(x.size()) != sol.size()) {
        throw ContractViolation("value: x must have n entries");
    }
    double acc = 0.0;
    for (int i : surviving(z)) acc += sol.component(i, z).f(x[static_cast<std::size_t>(i)]);
    return acc;
}

std::vector<BarrierRow> barriers_table(PolicySolution const& sol)
{
    std::vector<BarrierRow> rows;
    int const n = sol.size();
    for (std::uint32_t mask = 0; mask < sol.params().state_count(); ++mask) {
        DefaultState z(n, mask);
        for (int i : surviving(z)) {
            auto const& c = sol.component(i, z);
            rows.push_back({z.bits(), i + 1, c.m, c.C});
        }
    }
    return rows;
}

ExpPolyPiecewise source_term(PolicySolution const& sol, int i, DefaultState const& z)
{
    ExpPolyPiecewise h;
    for (int l : surviving(z)) {
        if (l == i) continue;
        h = add(h, scale(sol.component(i, z.with_default(l)).f, sol.params().lambda(l, z)));
    }
    return h;
}

}  // namespace divbar
