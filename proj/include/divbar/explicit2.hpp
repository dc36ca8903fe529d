// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "divbar/model.hpp"

namespace divbar {

class PolicySolution;

/**
 * Closed-form two-line solution for one subsidiary, written out term by
 * term. Deliberately independent of expfun/vi_solver so that it can serve
 * as a cross-check.
 *
 * Level 1 (other line defaulted): roots theta_hat of
 *   (1/2) b^2 t^2 + a t - (r + lambda_i(z_i)) = 0,
 * barrier m_single = 2/(th1 + th2) log(th2/th1) and
 * C_single = 1/(th1 e^{th1 m} + th2 e^{-th2 m}).
 * Level 2 (both alive): roots theta of the same equation with
 * r + lambda_1(0,0) + lambda_2(0,0).
 */
struct Explicit2Component {
    int subsidiary = 0;  // 0-based
    double alpha = 0.0;
    double b = 0.0;
    double lambda_other = 0.0;  // intensity of the other line in (0,0)
    double theta_hat1 = 0.0;
    double theta_hat2 = 0.0;
    double m_single = 0.0;
    double C_single = 0.0;
    double K = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double m_both = 0.0;
    double C_both = 0.0;

    /// Derivative `order` in {0,1,2} of f_i(x, z_i).
    double single(double x, int order = 0) const;
    /// Branches of the particular solution on [0, m_single] and beyond.
    double f11(double x, int order = 0) const;
    double f12(double x, int order = 0) const;
    double f1(double x, int order = 0) const { return x <= m_single ? f11(x, order) : f12(x, order); }
    double f2(double x, int order = 0) const;
    /// f_i(x, (0,0)) assembled from the three branches.
    double both(double x, int order = 0) const;
    /// q_i(x) = f_i1'' + (alpha - f_i1') / f_i2' * f_i2''.
    double q(double x) const;
};

struct Explicit2Solution {
    std::array<Explicit2Component, 2> parts;
};

struct Explicit2Result {
    std::optional<Explicit2Solution> solution;
    std::string unavailable_reason;  // set when solution is empty
};

/// Requires n = 2 and valid params. Root collisions |theta_hat - theta| <=
/// 1e-9 make the oracle unavailable (reported, not thrown).
Explicit2Result solve_explicit2(ModelParams const& params);

struct ComparisonRow {
    std::string function;  // e.g. "f1(00)"
    double x_max = 0.0;
    int points = 0;
    double max_abs_diff = 0.0;
};

/// Max |generic - explicit| per function on `points` equally spaced points
/// of [0, m + 1], for f_i(., (0,0)) and f_i(., z_i).
std::vector<ComparisonRow> compare_explicit2(PolicySolution const& generic, Explicit2Solution const& expl,
                                             int points = 200);

}  // namespace divbar
