// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "divbar/expfun.hpp"

namespace divbar {

/**
 * Coefficients of the one-dimensional problem
 *
 *   max{ A f + h, gamma - f' } = 0,   A f = -mu f + nu f' + (1/2) sigma^2 f''.
 *
 * For subsidiary i in state z: mu = r + sum of surviving intensities,
 * nu = a_i, sigma = b_i, gamma = alpha_i.
 */
struct OperatorCoeffs {
    double mu = 0.0;
    double nu = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;

    /// Positive root of (1/2) sigma^2 t^2 + nu t - mu = 0.
    double theta1() const;
    /// Minus the negative root (so theta2 > 0).
    double theta2() const;

    /// A applied to a piecewise function, as a piecewise function.
    ExpPolyPiecewise apply(ExpPolyPiecewise const& f) const;
};

/// Tolerances shared by the solver and its post-construction checks.
struct SolverSettings {
    double root_tol = 1e-12;        // bisection bracket width
    double smooth_fit_tol = 1e-8;   // |f'(m) - gamma|
    double smooth_fit2_tol = 1e-6;  // |f''(m)|
    double concavity_tol = 1e-10;   // f'' <= tol
    double residual_tol = 1e-7;     // VI residual on the check grid
    int residual_points = 500;
    int admissibility_points = 200;
    int touch_refinements = 20;
    bool check_admissibility = true;
    bool check_invariants = true;
};

struct PhiPair {
    ExpPolyPiecewise phi1;  // particular solution, phi1(0) = phi1'(0) = 0
    ExpPolyPiecewise phi2;  // e^{theta1 x} - e^{-theta2 x}
};

struct Boundary {
    double m = 0.0;
    double C = 0.0;
};

struct VISolution {
    OperatorCoeffs coeffs;
    double m = 0.0;
    double C = 0.0;
    ExpPolyPiecewise phi1;
    ExpPolyPiecewise phi2;
    ExpPolyPiecewise f;
    ExpPolyPiecewise h;
};

/// Throws ContractViolation when h(0) != 0 or h is not nonnegative,
/// increasing (unless identically zero) and concave on the check grid.
void check_source(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h,
                  SolverSettings const& settings = {});

PhiPair build_phi(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h,
                  SolverSettings const& settings = {});

/// q(x) = phi1'' + (gamma - phi1') / phi2' * phi2''.
double smooth_fit_q(OperatorCoeffs const& coeffs, PhiPair const& phis, double x);

/**
 * Smallest positive root m of q, found by a forward scan with step
 * 0.1/theta1 up to 200/theta1 followed by bisection; C = (gamma -
 * phi1'(m)) / phi2'(m). Throws NoBoundaryError when q never reaches zero.
 */
Boundary find_boundary(OperatorCoeffs const& coeffs, PhiPair const& phis,
                       SolverSettings const& settings = {});

/// f = phi1 + C phi2 on [0, m], affine with slope gamma beyond.
/// Throws ConstructionError naming the first failed invariant.
VISolution assemble(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h, PhiPair phis,
                    Boundary const& boundary, SolverSettings const& settings = {});

/// build_phi + find_boundary + assemble.
VISolution solve_vi(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h,
                    SolverSettings const& settings = {});

/// Pointwise max{A f + h, gamma - f'} for a solved problem.
double vi_residual(VISolution const& sol, double x);

}  // namespace divbar
