// SPDX-License-Identifier: Apache-2.0
#include "divbar/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "divbar/config.hpp"
#include "divbar/errors.hpp"
#include "divbar/explicit2.hpp"
#include "divbar/recursion.hpp"
#include "divbar/report.hpp"
#include "divbar/simulate.hpp"
#include "divbar/verify.hpp"

namespace divbar {

namespace {

struct RunSpec {
    std::string command;
    std::string config;
    std::string out = ".";
    std::optional<double> tol;
    std::optional<int> grid_points;
    std::int64_t paths = 10000;
    double dt = 1e-3;
    double horizon = 0.0;
    std::uint64_t seed = 1;
    std::vector<double> perturb{1.0};
    std::vector<double> x0;
    std::string z0;
    int threads = 1;
};

void add_common(CLI::App* sub, RunSpec& spec)
{
    sub->add_option("--config", spec.config, "Model config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", spec.out, "Output directory");
    sub->add_option("--threads", spec.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* sub, RunSpec& spec)
{
    sub->add_option("--tol", spec.tol, "Residual tolerance");
    sub->add_option("--grid-points", spec.grid_points, "Grid points per axis")->check(CLI::Range(2, 100000));
}

void add_sim(CLI::App* sub, RunSpec& spec)
{
    sub->add_option("--paths", spec.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    sub->add_option("--dt", spec.dt, "Euler step")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", spec.horizon, "Truncation time (default 20/r)");
    sub->add_option("--seed", spec.seed, "RNG seed");
    sub->add_option("--perturb", spec.perturb, "Barrier scale factors")->delimiter(',');
    sub->add_option("--x0", spec.x0, "Initial surpluses (default m_i(z0)/2)")->delimiter(',');
    sub->add_option("--z0", spec.z0, "Initial default state as a bitstring (default all alive)");
}

std::ofstream open_out(RunSpec const& spec, char const* name)
{
    std::filesystem::create_directories(spec.out);
    auto const path = std::filesystem::path(spec.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

int run(RunSpec const& spec, std::ostream& out, std::ostream& err)
{
    ModelParams params;
    try {
        params = load_config(spec.config);
        require_valid(params);
    } catch (std::exception const& e) {
        err << "invalid config: " << e.what() << '\n';
        return kExitInvalidConfig;
    }

    std::optional<PolicySolution> sol;
    try {
        sol = solve_all(params, {}, spec.threads);
    } catch (std::exception const& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolverError;
    }

    if (spec.command == "barriers") {
        write_barriers_csv(out, barriers_table(*sol));
        return 0;
    }
    if (spec.command == "solve") {
        auto b = open_out(spec, "barriers.csv");
        write_barriers_csv(b, barriers_table(*sol));
        auto v = open_out(spec, "value_grid.csv");
        write_value_grid_csv(v, *sol, spec.grid_points.value_or(21));
        auto j = open_out(spec, "policy.json");
        j << policy_to_json(*sol);
        out << "solved " << params.state_count() << " states; wrote barriers.csv, value_grid.csv, policy.json to "
            << spec.out << '\n';
        return 0;
    }
    if (spec.command == "verify") {
        GridSpec grid;
        if (spec.tol) grid.tol = *spec.tol;
        if (spec.grid_points) grid.points_per_axis = *spec.grid_points;
        auto const rep = verify_all(*sol, grid);
        auto r = open_out(spec, "report.csv");
        write_report_csv(r, rep);
        for (auto const& e : rep.entries) {
            out << (e.passed ? "ok   " : (e.hard ? "FAIL " : "warn ")) << e.name << "  max=" << format_number(e.max_violation)
                << "  tol=" << format_number(e.tolerance) << '\n';
        }
        return rep.hard_failure() ? kExitVerificationFailed : 0;
    }
    if (spec.command == "simulate") {
        DefaultState z0 = DefaultState::all_alive(params.n);
        try {
            if (!spec.z0.empty()) z0 = DefaultState::from_bits(spec.z0);
            if (z0.size() != params.n) throw ContractViolation("--z0 must have n bits");
        } catch (std::exception const& e) {
            err << "invalid --z0: " << e.what() << '\n';
            return kExitInvalidConfig;
        }
        std::vector<double> x0 = spec.x0;
        if (x0.empty()) {
            x0.assign(static_cast<std::size_t>(params.n), 0.0);
            for (int i : surviving(z0)) x0[static_cast<std::size_t>(i)] = 0.5 * sol->barrier(i, z0);
        }
        SimConfig cfg;
        cfg.dt = spec.dt;
        cfg.horizon = spec.horizon;
        cfg.paths = spec.paths;
        cfg.seed = spec.seed;
        cfg.threads = spec.threads;
        try {
            auto const rows = compare_policies(params, *sol, spec.perturb, x0, z0, cfg);
            auto s = open_out(spec, "sim.csv");
            write_sim_csv(s, rows, params.n);
            write_sim_csv(out, rows, params.n);
        } catch (ContractViolation const& e) {
            err << "invalid simulation input: " << e.what() << '\n';
            return kExitInvalidConfig;
        }
        return 0;
    }
    if (spec.command == "explicit2") {
        if (params.n != 2) {
            err << "explicit2 requires n = 2\n";
            return kExitInvalidConfig;
        }
        auto const ex = solve_explicit2(params);
        auto c = open_out(spec, "comparison.csv");
        if (!ex.solution) {
            write_comparison_csv(c, {});
            out << "explicit formulas unavailable: " << ex.unavailable_reason << '\n';
            return 0;
        }
        auto const rows = compare_explicit2(*sol, *ex.solution, spec.grid_points.value_or(200));
        write_comparison_csv(c, rows);
        write_comparison_csv(out, rows);
        return 0;
    }
    err << "unknown command " << spec.command << '\n';
    return kExitInvalidConfig;
}

}  // namespace

int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Optimal dividend barriers for a group of insurance lines under default contagion", "divbar"};
    app.require_subcommand(1);
    RunSpec spec;

    auto* solve = app.add_subcommand("solve", "Solve and write barriers.csv, value_grid.csv, policy.json");
    add_common(solve, spec);
    add_grid(solve, spec);
    auto* verify = app.add_subcommand("verify", "Run residual and property checks, write report.csv");
    add_common(verify, spec);
    add_grid(verify, spec);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo value of scaled optimal barriers, write sim.csv");
    add_common(simulate, spec);
    add_sim(simulate, spec);
    auto* explicit2 = app.add_subcommand("explicit2", "Compare against the closed-form two-line solution");
    add_common(explicit2, spec);
    add_grid(explicit2, spec);
    auto* barriers = app.add_subcommand("barriers", "Print the barrier table");
    add_common(barriers, spec);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        return app.exit(e, out, err);
    }
    spec.command = app.get_subcommands().front()->get_name();
    try {
        return run(spec, out, err);
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverError;
    }
}

}  // namespace divbar
