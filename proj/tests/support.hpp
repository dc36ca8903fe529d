// SPDX-License-Identifier: Apache-2.0
// Shared fixtures and independent oracles for the test binaries.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "divbar/model.hpp"

namespace divbar::testing {

inline ModelParams two_line(double a1, double a2, double b1, double b2, double r, double alpha1,
                            double l1_00, double l2_00, double l1_01, double l2_10, double rho = 0.0)
{
    ModelParams p;
    p.n = 2;
    p.drift = {a1, a2};
    p.vol = {b1, b2};
    p.corr = {{1.0, rho}, {rho, 1.0}};
    p.discount = r;
    p.weights = {alpha1, 1.0 - alpha1};
    double const nan = std::nan("");
    // mask 0 = "00", mask 1 = "10" (subsidiary 1 defaulted), mask 2 = "01", mask 3 = "11"
    p.intensity = {{l1_00, l2_00}, {nan, l2_10}, {l1_01, nan}, {nan, nan}};
    return p;
}

/// Two-line reference parameters, same as configs/fig1.json.
inline ModelParams fig1(double rho = 0.0)
{
    return two_line(0.1, 0.15, 0.07, 0.06, 0.05, 0.4, 0.02, 0.01, 0.04, 0.04, rho);
}

inline ModelParams one_line(double a, double b, double r, double lambda)
{
    ModelParams p;
    p.n = 1;
    p.drift = {a};
    p.vol = {b};
    p.corr = {{1.0}};
    p.discount = r;
    p.weights = {1.0};
    p.intensity = {{lambda}, {std::nan("")}};
    return p;
}

/// Random valid two-line model with contagion factors in [1, 5].
inline ModelParams random_two_line(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> drift(0.05, 0.3), vol(0.03, 0.3), rate(0.02, 0.1), w(0.2, 0.8),
        lam(0.005, 0.05), factor(1.0, 5.0), rho(-0.9, 0.9);
    double const a1 = drift(rng), a2 = drift(rng), b1 = vol(rng), b2 = vol(rng), r = rate(rng), al = w(rng);
    double const l1 = lam(rng), l2 = lam(rng);
    double const f1 = factor(rng), f2 = factor(rng);
    return two_line(a1, a2, b1, b2, r, al, l1, l2, l1 * f1, l2 * f2, rho(rng));
}

/**
 * Classical single-line barrier solution written straight from its closed
 * form: roots of (1/2) b^2 t^2 + a t - mu = 0, m = 2/(t1 + t2) log(t2/t1),
 * f = gamma C (e^{t1 x} - e^{-t2 x}) below m with
 * C = 1/(t1 e^{t1 m} + t2 e^{-t2 m}), affine with slope gamma above.
 */
struct SingleLineOracle {
    double t1, t2, m, C, gamma;

    SingleLineOracle(double a, double b, double mu, double g) : gamma(g)
    {
        double const d = std::sqrt(a * a + 2.0 * b * b * mu);
        t1 = (-a + d) / (b * b);
        t2 = (a + d) / (b * b);
        m = 2.0 / (t1 + t2) * std::log(t2 / t1);
        C = 1.0 / (t1 * std::exp(t1 * m) + t2 * std::exp(-t2 * m));
    }

    double f(double x) const
    {
        if (x <= m) return gamma * C * (std::exp(t1 * x) - std::exp(-t2 * x));
        return f(m) + gamma * (x - m);
    }
};

/// Adaptive Gauss-Kronrod integral of g over [a, b], split at `cuts`.
inline double integrate(std::function<double(double)> const& g, double a, double b,
                        std::vector<double> const& cuts = {})
{
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> pts{a};
    for (double c : cuts) {
        if (c > a && c < b) pts.push_back(c);
    }
    pts.push_back(b);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        total += gauss_kronrod<double, 61>::integrate(g, pts[k], pts[k + 1], 15, 1e-14);
    }
    return total;
}

}  // namespace divbar::testing
