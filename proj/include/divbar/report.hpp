// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "divbar/explicit2.hpp"
#include "divbar/recursion.hpp"
#include "divbar/simulate.hpp"
#include "divbar/verify.hpp"

namespace divbar {

/// Shortest round-trip-safe form: 17 significant digits, '.' decimal point.
std::string format_number(double v);

void write_barriers_csv(std::ostream& os, std::vector<BarrierRow> const& rows);

/**
 * state,x1..xN,f for every state with a survivor. States with at most 3
 * survivors get a tensor grid of `points` per axis over [0, m_i(z) + 1];
 * larger states get the diagonal x_i = t (m_i(z) + 1), t in [0, 1].
 * Coordinates of defaulted subsidiaries are written as 0.
 */
void write_value_grid_csv(std::ostream& os, PolicySolution const& sol, int points);

void write_report_csv(std::ostream& os, VerificationReport const& report);
void write_sim_csv(std::ostream& os, std::vector<PolicyComparisonRow> const& rows, int n);
void write_comparison_csv(std::ostream& os, std::vector<ComparisonRow> const& rows);

/// Params plus every component's barrier, constant and piecewise f.
std::string policy_to_json(PolicySolution const& sol);

}  // namespace divbar
