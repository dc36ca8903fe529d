// SPDX-License-Identifier: Apache-2.0
#include "divbar/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "divbar/errors.hpp"

namespace divbar {

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void require_coeffs(OperatorCoeffs const& c)
{
    if (!(c.mu > 0.0) || !(c.nu > 0.0) || !(c.sigma > 0.0) || !(c.gamma > 0.0)) {
        throw ContractViolation("OperatorCoeffs: mu, nu, sigma, gamma must all be positive");
    }
}

// q and its ingredients with the derivatives computed once.
class SmoothFit {
public:
    SmoothFit(OperatorCoeffs const& coeffs, PhiPair const& phis)
        : gamma_(coeffs.gamma),
          d1_phi1_(phis.phi1.deriv(1)),
          d2_phi1_(phis.phi1.deriv(2)),
          d1_phi2_(phis.phi2.deriv(1)),
          d2_phi2_(phis.phi2.deriv(2))
    {
    }

    double q(double x) const
    {
        return d2_phi1_(x) + (gamma_ - d1_phi1_(x)) / d1_phi2_(x) * d2_phi2_(x);
    }

    double constant_at(double m) const { return (gamma_ - d1_phi1_(m)) / d1_phi2_(m); }

private:
    double gamma_;
    ExpPolyPiecewise d1_phi1_, d2_phi1_, d1_phi2_, d2_phi2_;
};

}  // namespace

double OperatorCoeffs::theta1() const
{
    double const disc = std::sqrt(nu * nu + 2.0 * sigma * sigma * mu);
    return 2.0 * mu / (nu + disc);
}

double OperatorCoeffs::theta2() const
{
    double const disc = std::sqrt(nu * nu + 2.0 * sigma * sigma * mu);
    return (nu + disc) / (sigma * sigma);
}

ExpPolyPiecewise OperatorCoeffs::apply(ExpPolyPiecewise const& f) const
{
    return add(scale(f, -mu), add(scale(f.deriv(1), nu), scale(f.deriv(2), 0.5 * sigma * sigma)));
}

void check_source(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h, SolverSettings const& settings)
{
    double const h0 = h(0.0);
    if (std::abs(h0) > 1e-9) throw ContractViolation("source h: h(0) = " + num(h0) + ", expected 0");
    if (h.is_zero()) return;
    auto const bp = h.breakpoints();
    double const x_hi = bp.back() + 10.0 / coeffs.theta1();
    auto const d1 = h.deriv(1);
    auto const d2 = h.deriv(2);
    int const n = std::max(2, settings.admissibility_points);
    for (int k = 0; k < n; ++k) {
        double const x = x_hi * k / (n - 1);
        double const v = h(x);
        double const s = d1(x);
        double const c = d2(x);
        if (v < -1e-12) throw ContractViolation("source h: negative value " + num(v) + " at x = " + num(x));
        if (!(s > 0.0)) throw ContractViolation("source h: h' = " + num(s) + " not positive at x = " + num(x));
        if (c > 1e-9) throw ContractViolation("source h: h'' = " + num(c) + " positive at x = " + num(x));
    }
}

PhiPair build_phi(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h, SolverSettings const& settings)
{
    require_coeffs(coeffs);
    if (settings.check_admissibility) check_source(coeffs, h, settings);
    double const t1 = coeffs.theta1();
    double const t2 = coeffs.theta2();
    PhiPair out;
    out.phi1 = convolve_green(h, t1, t2, coeffs.sigma);
    out.phi2 = ExpPolyPiecewise::whole(ExpPolyPiece({{1.0, 0, t1}, {-1.0, 0, -t2}}));
    return out;
}

double smooth_fit_q(OperatorCoeffs const& coeffs, PhiPair const& phis, double x)
{
    return SmoothFit(coeffs, phis).q(x);
}

Boundary find_boundary(OperatorCoeffs const& coeffs, PhiPair const& phis, SolverSettings const& settings)
{
    require_coeffs(coeffs);
    SmoothFit const sf(coeffs, phis);
    double const t1 = coeffs.theta1();
    double const step = 0.1 / t1;
    double const x_max = 200.0 / t1;

    double const q0 = sf.q(0.0);
    if (!(q0 < 0.0)) {
        throw ContractViolation("find_boundary: q(0) = " + num(q0) + " is not negative");
    }
    // Local maxima of q within this distance of zero are inspected for a
    // tangential touch.
    double const touch_band = 1e-3 * std::abs(q0);

    double lo = 0.0;
    double hi = -1.0;
    try {
        double x_prev = 0.0;
        double q_prev = q0;
        double x_prev2 = 0.0;
        double q_prev2 = q0;
        for (int k = 1; k * step <= x_max + 1e-12 * x_max; ++k) {
            double const x = k * step;
            double const qx = sf.q(x);
            if (qx >= 0.0) {
                lo = x_prev;
                hi = x;
                break;
            }
            if (k >= 2 && q_prev >= q_prev2 && q_prev >= qx && q_prev > -touch_band) {
                // Zoom on the local maximum, halving the sampling step. Every
                // sampled point so far has q < 0, so a bracket's left end is valid.
                double a = x_prev2;
                double b = x;
                double best_x = x_prev;
                double best_q = q_prev;
                for (int level = 0; level < settings.touch_refinements && hi < 0.0; ++level) {
                    double xs[5] = {a, 0.0, 0.0, 0.0, b};
                    double qs[5] = {-1.0, 0.0, 0.0, 0.0, -1.0};
                    for (int s = 1; s <= 3; ++s) {
                        xs[s] = a + (b - a) * s / 4.0;
                        qs[s] = sf.q(xs[s]);
                        if (qs[s] >= 0.0) {
                            lo = xs[s - 1];
                            hi = xs[s];
                            break;
                        }
                    }
                    if (hi >= 0.0) break;
                    int arg = 1;
                    for (int s = 2; s <= 3; ++s) {
                        if (qs[s] > qs[arg]) arg = s;
                    }
                    if (qs[arg] > best_q) {
                        best_q = qs[arg];
                        best_x = xs[arg];
                    }
                    a = xs[arg - 1];
                    b = xs[arg + 1];
                }
                if (hi >= 0.0) break;
                if (std::abs(best_q) <= 1e-12 * std::abs(q0)) {
                    double const C = sf.constant_at(best_x);
                    return {best_x, C};
                }
            }
            x_prev2 = x_prev;
            q_prev2 = q_prev;
            x_prev = x;
            q_prev = qx;
        }
    } catch (std::out_of_range const& e) {
        throw NoBoundaryError(std::string("find_boundary: overflow during scan (") + e.what() + ")");
    }
    if (hi < 0.0) {
        throw NoBoundaryError("find_boundary: q has no sign change on (0, " + num(x_max) + "]");
    }

    while (hi - lo > settings.root_tol) {
        double const mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sf.q(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double const m = 0.5 * (lo + hi);
    double const C = sf.constant_at(m);
    if (!(C > 0.0)) throw NoBoundaryError("find_boundary: constant C = " + num(C) + " is not positive");
    return {m, C};
}

VISolution assemble(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h, PhiPair phis,
                    Boundary const& boundary, SolverSettings const& settings)
{
    VISolution sol;
    sol.coeffs = coeffs;
    sol.m = boundary.m;
    sol.C = boundary.C;
    sol.h = h;
    auto const g = add(phis.phi1, scale(phis.phi2, boundary.C));
    sol.f = shift_truncate(g, boundary.m);
    sol.phi1 = std::move(phis.phi1);
    sol.phi2 = std::move(phis.phi2);
    if (!settings.check_invariants) return sol;

    double const gamma = coeffs.gamma;
    double const m = sol.m;
    auto const d1 = sol.f.deriv(1);
    auto const d2 = sol.f.deriv(2);
    auto const gen = add(coeffs.apply(sol.f), h);

    if (double const f0 = sol.f(0.0); std::abs(f0) > 1e-12) {
        throw ConstructionError("boundary", "f(0) = " + num(f0));
    }
    if (double const e = std::abs(d1.eval(m, Side::left) - gamma); e > settings.smooth_fit_tol) {
        throw ConstructionError("smooth_fit_slope", "|f'(m) - gamma| = " + num(e));
    }
    if (double const e = std::abs(d2.eval(m, Side::left)); e > settings.smooth_fit2_tol) {
        throw ConstructionError("smooth_fit_curvature", "|f''(m)| = " + num(e));
    }
    auto const cont = sol.f.continuity();
    if (cont.value_jump > 1e-9 || cont.slope_jump > 1e-8) {
        throw ConstructionError("continuity", "value jump " + num(cont.value_jump) + ", slope jump " +
                                                  num(cont.slope_jump));
    }
    double const x_hi = std::max(2.0 * m, h.breakpoints().back() + m);
    int const n = std::max(2, settings.residual_points);
    for (int k = 0; k < n; ++k) {
        double const x = x_hi * k / (n - 1);
        double const curv = d2(x);
        if (curv > settings.concavity_tol) {
            throw ConstructionError("concavity", "f''(" + num(x) + ") = " + num(curv));
        }
        double const slope_gap = gamma - d1(x);
        double const g_x = gen(x);
        if (slope_gap > settings.residual_tol) {
            throw ConstructionError("gradient_floor", "gamma - f'(" + num(x) + ") = " + num(slope_gap));
        }
        if (x <= m) {
            if (std::abs(g_x) > settings.residual_tol) {
                throw ConstructionError("ode_region", "A f + h at " + num(x) + " = " + num(g_x));
            }
        } else if (g_x > settings.residual_tol) {
            throw ConstructionError("payout_region", "A f + h at " + num(x) + " = " + num(g_x));
        }
        if (double const r = std::abs(std::max(g_x, slope_gap)); r > settings.residual_tol) {
            throw ConstructionError("vi_residual", "residual at " + num(x) + " = " + num(r));
        }
    }
    return sol;
}

VISolution solve_vi(OperatorCoeffs const& coeffs, ExpPolyPiecewise const& h, SolverSettings const& settings)
{
    auto phis = build_phi(coeffs, h, settings);
    auto const boundary = find_boundary(coeffs, phis, settings);
    return assemble(coeffs, h, std::move(phis), boundary, settings);
}

double vi_residual(VISolution const& sol, double x)
{
    auto const& c = sol.coeffs;
    auto const& f = sol.f;
    double const gen = -c.mu * f(x) + c.nu * f.deriv(1)(x) + 0.5 * c.sigma * c.sigma * f.deriv(2)(x) + sol.h(x);
    return std::max(gen, c.gamma - f.deriv(1)(x));
}

}  // namespace divbar
