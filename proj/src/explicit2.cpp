// SPDX-License-Identifier: Apache-2.0
#include "divbar/explicit2.hpp"

#include <algorithm>
#include <cmath>

#include "divbar/errors.hpp"
#include "divbar/recursion.hpp"

namespace divbar {

namespace {

// d^order/dx^order of c e^{r x}
double ex(double c, double r, double x, int order)
{
    double k = c;
    for (int j = 0; j < order; ++j) k *= r;
    return k * std::exp(r * x);
}

// d^order/dx^order of (c0 + c1 x)
double lin(double c0, double c1, double x, int order)
{
    if (order == 0) return c0 + c1 * x;
    return order == 1 ? c1 : 0.0;
}

}  // namespace

double Explicit2Component::single(double x, int order) const
{
    if (x <= m_single) {
        return alpha * C_single * (ex(1.0, theta_hat1, x, order) - ex(1.0, -theta_hat2, x, order));
    }
    double const top = alpha * C_single * (std::exp(theta_hat1 * m_single) - std::exp(-theta_hat2 * m_single));
    return lin(top - alpha * m_single, alpha, x, order);
}

double Explicit2Component::f11(double x, int order) const
{
    double const t1 = theta1, t2 = theta2, h1 = theta_hat1, h2 = theta_hat2;
    double const pre = -2.0 / (b * b) * alpha * lambda_other * C_single / (t1 + t2);
    double const s = (t1 + t2) / ((h1 - t1) * (h1 + t2)) * ex(1.0, h1, x, order) +
                     (t1 + t2) / ((h2 + t1) * (-h2 + t2)) * ex(1.0, -h2, x, order) -
                     (h1 + h2) / ((h1 - t1) * (h2 + t1)) * ex(1.0, t1, x, order) -
                     (h1 + h2) / ((h1 + t2) * (-h2 + t2)) * ex(1.0, -t2, x, order);
    return pre * s;
}

double Explicit2Component::f12(double x, int order) const
{
    double const t1 = theta1, t2 = theta2, h1 = theta_hat1, h2 = theta_hat2;
    double const m = m_single;
    double const base = -2.0 / (b * b) * lambda_other / (t1 + t2);

    double const first =
        ex(1.0, t1, x, order) / (h1 - t1) * (std::exp((h1 - t1) * m) - 1.0) +
        ex(1.0, -t2, x, order) / (h1 + t2) * (-std::exp((h1 + t2) * m) + 1.0) +
        ex(1.0, t1, x, order) / (h2 + t1) * (std::exp(-(h2 + t1) * m) - 1.0) +
        ex(1.0, -t2, x, order) / (-h2 + t2) * (std::exp((-h2 + t2) * m) - 1.0);

    double const second = (ex(std::exp(-t1 * m), t1, x, order) - lin(1.0, 0.0, x, order)) / t1 +
                          (ex(std::exp(t2 * m), -t2, x, order) - lin(1.0, 0.0, x, order)) / t2;

    double const third =
        (lin(-1.0, -t1, x, order) + (t1 * m + 1.0) * ex(std::exp(-t1 * m), t1, x, order)) / (t1 * t1) +
        (lin(1.0, -t2, x, order) + (t2 * m - 1.0) * ex(std::exp(t2 * m), -t2, x, order)) / (t2 * t2);

    return base * (alpha * C_single * first + K * second + alpha * third);
}

double Explicit2Component::f2(double x, int order) const
{
    return ex(1.0, theta1, x, order) - ex(1.0, -theta2, x, order);
}

double Explicit2Component::both(double x, int order) const
{
    if (x <= m_both) return f1(x, order) + C_both * f2(x, order);
    double const top = f1(m_both) + C_both * f2(m_both);
    return lin(top - alpha * m_both, alpha, x, order);
}

double Explicit2Component::q(double x) const
{
    return f1(x, 2) + (alpha - f1(x, 1)) / f2(x, 1) * f2(x, 2);
}

Explicit2Result solve_explicit2(ModelParams const& params)
{
    if (params.n != 2) throw ContractViolation("solve_explicit2: requires n = 2");
    require_valid(params);

    Explicit2Solution out;
    DefaultState const both_alive(2, 0u);
    double const lambda_sum = params.lambda(0, both_alive) + params.lambda(1, both_alive);
    for (int i = 0; i < 2; ++i) {
        auto const ui = static_cast<std::size_t>(i);
        int const other = 1 - i;
        DefaultState const zi(2, 1u << other);
        double const a = params.drift[ui];
        double const b = params.vol[ui];
        double const r = params.discount;

        Explicit2Component c;
        c.subsidiary = i;
        c.alpha = params.weights[ui];
        c.b = b;
        c.lambda_other = params.lambda(other, both_alive);

        double const d1 = std::sqrt(a * a + 2.0 * b * b * (r + params.lambda(i, zi)));
        c.theta_hat1 = (-a + d1) / (b * b);
        c.theta_hat2 = (a + d1) / (b * b);
        c.m_single = 2.0 / (c.theta_hat1 + c.theta_hat2) * std::log(c.theta_hat2 / c.theta_hat1);
        c.C_single = 1.0 / (c.theta_hat1 * std::exp(c.theta_hat1 * c.m_single) +
                            c.theta_hat2 * std::exp(-c.theta_hat2 * c.m_single));
        c.K = c.alpha * c.C_single *
                  (std::exp(c.theta_hat1 * c.m_single) - std::exp(-c.theta_hat2 * c.m_single)) -
              c.alpha * c.m_single;

        double const d2 = std::sqrt(a * a + 2.0 * b * b * (r + lambda_sum));
        c.theta1 = (-a + d2) / (b * b);
        c.theta2 = (a + d2) / (b * b);

        if (std::abs(c.theta_hat1 - c.theta1) <= 1e-9 || std::abs(c.theta_hat2 - c.theta2) <= 1e-9) {
            return {std::nullopt, "characteristic roots collide for subsidiary " + std::to_string(i + 1) +
                                      "; explicit formulas have vanishing denominators"};
        }

        // m_i(0,0) = inf{x : q_i(x) = 0}: forward scan then bisection.
        double const step = 0.1 / c.theta1;
        double const x_max = 200.0 / c.theta1;
        double lo = 0.0, hi = -1.0;
        for (double x = step; x <= x_max; x += step) {
            if (c.q(x) >= 0.0) {
                hi = x;
                lo = x - step;
                break;
            }
        }
        if (hi < 0.0) {
            return {std::nullopt, "no smooth-fit root for subsidiary " + std::to_string(i + 1)};
        }
        while (hi - lo > 1e-12) {
            double const mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (c.q(mid) < 0.0 ? lo : hi) = mid;
        }
        c.m_both = 0.5 * (lo + hi);
        c.C_both = (c.alpha - c.f1(c.m_both, 1)) / c.f2(c.m_both, 1);
        out.parts[ui] = c;
    }
    return {out, {}};
}

std::vector<ComparisonRow> compare_explicit2(PolicySolution const& generic, Explicit2Solution const& expl,
                                             int points)
{
    std::vector<ComparisonRow> rows;
    DefaultState const both_alive(2, 0u);
    int const n = std::max(2, points);
    for (int i = 0; i < 2; ++i) {
        auto const& c = expl.parts[static_cast<std::size_t>(i)];
        DefaultState const zi(2, 1u << (1 - i));
        auto const& f_both = generic.component(i, both_alive).f;
        auto const& f_single = generic.component(i, zi).f;

        ComparisonRow both{"f" + std::to_string(i + 1) + "(00)", c.m_both + 1.0, n, 0.0};
        ComparisonRow single{"f" + std::to_string(i + 1) + "(" + zi.bits() + ")", c.m_single + 1.0, n, 0.0};
        for (int k = 0; k < n; ++k) {
            double const xb = both.x_max * k / (n - 1);
            both.max_abs_diff = std::max(both.max_abs_diff, std::abs(f_both(xb) - c.both(xb)));
            double const xs = single.x_max * k / (n - 1);
            single.max_abs_diff = std::max(single.max_abs_diff, std::abs(f_single(xs) - c.single(xs)));
        }
        rows.push_back(both);
        rows.push_back(single);
    }
    return rows;
}

}  // namespace divbar
