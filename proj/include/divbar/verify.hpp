// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace divbar {

class PolicySolution;

struct CheckEntry {
    std::string name;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    /// Soft entries are reported but never fail a run.
    bool hard = true;
    std::string location;  // worst point, e.g. "state=01 x=(0.12)"
};

struct VerificationReport {
    std::vector<CheckEntry> entries;

    bool hard_failure() const;
    CheckEntry const* find(std::string const& name) const;
    void append(VerificationReport const& other);
};

struct GridSpec {
    /// Points per axis on [0, max barrier + 1]; full tensor grid when a
    /// state has at most 3 survivors.
    int points_per_axis = 500;
    /// Uniform random points used instead of the tensor grid above 3 survivors.
    int random_samples = 10000;
    std::uint64_t seed = 20240611;
    double tol = 1e-6;
    double smooth_fit_tol = 1e-8;
    double smooth_fit2_tol = 1e-6;
    double concavity_tol = 1e-10;
    double fd_step = 1e-5;
    double fd_rel_tol = 1e-6;
    /// Finite differences skip points this close to a breakpoint.
    double fd_exclusion = 1e-3;
    double c2_tol = 1e-4;
};

/**
 * Variational inequality checks on every default state:
 *   G(x, z) = L^z f + sum_l lambda_l(z) (f(x^l, z^l) - f(x, z))  and
 *   alpha_i - d_i f  for surviving i.
 * Entries: both terms <= tol, their max >= -tol, G = 0 where every
 * coordinate is below its barrier, alpha_i = d_i f where x_i is above
 * m_i(z), plus one-dimensional smooth fit and concavity per component.
 * Cross derivatives are identically zero for a separable f.
 */
VerificationReport check_hjbvi(PolicySolution const& sol, GridSpec const& spec = {});

/// m_i(0,0) >= m_i(z_i) as hard checks for n = 2; single-default steps
/// m_i(z) >= m_i(z^l) as one soft entry for n >= 3.
VerificationReport check_orderings(PolicySolution const& sol);

/// Analytic first and second derivatives against central differences,
/// C^2 fit at the barrier and the exactly affine tail.
VerificationReport check_derivatives(PolicySolution const& sol, GridSpec const& spec = {});

/// All of the above.
VerificationReport verify_all(PolicySolution const& sol, GridSpec const& spec = {});

}  // namespace divbar
