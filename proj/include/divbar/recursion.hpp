// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divbar/model.hpp"
#include "divbar/vi_solver.hpp"

namespace divbar {

struct BarrierRow {
    std::string state;  // bitstring, leftmost = subsidiary 1
    int subsidiary = 0;  // 1-based
    double m = 0.0;
    double C = 0.0;
};

/**
 * Solved lattice: one VISolution per (surviving subsidiary, state).
 *
 * The group value is separable, f(x, z) = sum over surviving i of
 * f_i(x_i, z), and does not depend on the correlation matrix.
 */
class PolicySolution {
public:
    PolicySolution(ModelParams params, std::vector<std::optional<VISolution>> table);

    ModelParams const& params() const noexcept { return params_; }
    int size() const noexcept { return params_.n; }

    /// Throws ContractViolation when subsidiary i has defaulted in z.
    VISolution const& component(int i, DefaultState const& z) const;
    double barrier(int i, DefaultState const& z) const { return component(i, z).m; }

    /// f_i(x, z); zero when i has defaulted in z.
    double component_value(int i, double x, DefaultState const& z) const;

private:
    ModelParams params_;
    std::vector<std::optional<VISolution>> table_;  // [mask * n + i]
};

/**
 * Backward induction from the all-defaulted state to the all-alive state.
 *
 * For state z and surviving i the source is
 *   h_i(x) = sum_{l surviving, l != i} lambda_l(z) f_i(x, z^l)
 * and the coefficients are mu = r + sum_{l surviving} lambda_l(z),
 * nu = a_i, sigma = b_i, gamma = alpha_i. States with the same number of
 * defaults are independent and are solved on `threads` workers.
 *
 * Solver failures are rethrown with the (subsidiary, state) attached.
 */
PolicySolution solve_all(ModelParams const& params, SolverSettings const& settings = {},
                         int threads = 1);

/// sum over surviving i of f_i(x_i, z); entries of defaulted i are ignored.
double value(PolicySolution const& sol, std::span<double const> x, DefaultState const& z);

/// One row per surviving (i, z), ordered by state mask then subsidiary.
std::vector<BarrierRow> barriers_table(PolicySolution const& sol);

/// The source term used for subsidiary i in state z, rebuilt from the
/// lower-level solutions.
ExpPolyPiecewise source_term(PolicySolution const& sol, int i, DefaultState const& z);

}  // namespace divbar
