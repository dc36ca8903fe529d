// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "divbar/cli.hpp"
#include "divbar/config.hpp"
#include "divbar/errors.hpp"
#include "divbar/explicit2.hpp"
#include "divbar/recursion.hpp"
#include "divbar/report.hpp"
#include "divbar/simulate.hpp"
#include "divbar/verify.hpp"

namespace py = pybind11;
using namespace divbar;

namespace {

DefaultState state_of(ModelParams const& p, std::string const& bits)
{
    if (bits.empty()) return DefaultState::all_alive(p.n);
    auto z = DefaultState::from_bits(bits);
    if (z.size() != p.n) throw ContractViolation("state must have n bits");
    return z;
}

py::dict entry_dict(CheckEntry const& e)
{
    py::dict d;
    d["name"] = e.name;
    d["max_violation"] = e.max_violation;
    d["tolerance"] = e.tolerance;
    d["passed"] = e.passed;
    d["hard"] = e.hard;
    d["location"] = e.location;
    return d;
}

py::dict sim_dict(SimResult const& r)
{
    py::dict d;
    d["estimate"] = r.estimate;
    d["std_error"] = r.std_error;
    d["paths"] = r.paths_used;
    d["per_subsidiary"] = r.per_subsidiary;
    d["tail_bound"] = r.tail_bound;
    d["horizon"] = r.horizon;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Optimal dividend barriers under default contagion";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NoBoundaryError>(m, "NoBoundaryError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def_readonly("n", &ModelParams::n)
        .def_readonly("drift", &ModelParams::drift)
        .def_readonly("vol", &ModelParams::vol)
        .def_readonly("corr", &ModelParams::corr)
        .def_readonly("discount", &ModelParams::discount)
        .def_readonly("weights", &ModelParams::weights)
        .def("to_json", [](ModelParams const& p) { return params_to_json(p); });

    m.def("parse_config", [](std::string const& text) { return parse_config(text); }, py::arg("text"));
    m.def("load_config", [](std::filesystem::path const& path) { return load_config(path); }, py::arg("path"));

    m.def("validate", [](ModelParams const& p) {
            std::vector<std::pair<std::string, std::string>> out;
            for (auto const& v : validate(p)) out.emplace_back(v.field, v.message);
            return out;
        }, py::arg("params"), "List of (field, message) for every violated constraint");

    py::class_<PolicySolution>(m, "PolicySolution")
        .def_property_readonly("params", &PolicySolution::params)
        .def("barrier", [](PolicySolution const& s, int i, std::string const& z) {
                return s.barrier(i - 1, state_of(s.params(), z));
            }, py::arg("subsidiary"), py::arg("state") = "")
        .def("component_value", [](PolicySolution const& s, int i, double x, std::string const& z) {
                return s.component_value(i - 1, x, state_of(s.params(), z));
            }, py::arg("subsidiary"), py::arg("x"), py::arg("state") = "")
        .def("value", [](PolicySolution const& s, std::vector<double> const& x, std::string const& z) {
                return value(s, x, state_of(s.params(), z));
            }, py::arg("x"), py::arg("state") = "")
        .def("barriers", [](PolicySolution const& s) {
                py::list rows;
                for (auto const& r : barriers_table(s)) {
                    py::dict d;
                    d["state"] = r.state;
                    d["subsidiary"] = r.subsidiary;
                    d["m"] = r.m;
                    d["C"] = r.C;
                    rows.append(d);
                }
                return rows;
            })
        .def("to_json", [](PolicySolution const& s) { return policy_to_json(s); });

    m.def("solve", [](ModelParams const& p, int threads) { return solve_all(p, {}, threads); }, py::arg("params"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    m.def("verify", [](PolicySolution const& s, int points, double tol) {
            GridSpec g;
            g.points_per_axis = points;
            g.tol = tol;
            VerificationReport rep;
            {
                py::gil_scoped_release nogil;
                rep = verify_all(s, g);
            }
            py::list out;
            for (auto const& e : rep.entries) out.append(entry_dict(e));
            return out;
        }, py::arg("solution"), py::arg("points") = 500, py::arg("tol") = 1e-6);

    m.def("simulate", [](PolicySolution const& s, std::vector<double> const& x0, std::string const& z0, double scale,
                         std::int64_t paths, double dt, double horizon, std::uint64_t seed, bool antithetic,
                         int threads) {
            SimConfig cfg;
            cfg.paths = paths;
            cfg.dt = dt;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.antithetic = antithetic;
            cfg.threads = threads;
            auto const z = state_of(s.params(), z0);
            SimResult r;
            {
                py::gil_scoped_release nogil;
                r = simulate_policy(s.params(), BarrierPolicy::from_solution(s, scale), x0, z, cfg);
            }
            return sim_dict(r);
        }, py::arg("solution"), py::arg("x0"), py::arg("state") = "", py::arg("scale") = 1.0,
        py::arg("paths") = 10000, py::arg("dt") = 1e-3, py::arg("horizon") = 0.0, py::arg("seed") = 1,
        py::arg("antithetic") = true, py::arg("threads") = 1);

    m.def("compare_explicit2", [](PolicySolution const& s, int points) -> py::object {
            auto const ex = solve_explicit2(s.params());
            if (!ex.solution) return py::none();
            py::dict d;
            for (auto const& r : compare_explicit2(s, *ex.solution, points)) d[py::str(r.function)] = r.max_abs_diff;
            return d;
        }, py::arg("solution"), py::arg("points") = 200);

    m.def("run_cli", [](std::vector<std::string> args) {
            args.insert(args.begin(), "divbar");
            std::vector<char const*> argv;
            for (auto const& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release nogil;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        }, py::arg("args"));
}
