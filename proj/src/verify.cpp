// SPDX-License-Identifier: Apache-2.0
#include "divbar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "divbar/recursion.hpp"

namespace divbar {

namespace {

std::string fmt_point(DefaultState const& z, std::span<double const> x)
{
    std::ostringstream os;
    os.precision(10);
    os << "state=" << z.bits() << " x=(";
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << x[k];
    os << ")";
    return os.str();
}

std::string fmt_component(int i, DefaultState const& z, double x)
{
    std::ostringstream os;
    os.precision(10);
    os << "subsidiary=" << i + 1 << " state=" << z.bits() << " x=" << x;
    return os.str();
}

// Running maximum of a violation together with where it occurred.
struct Tracker {
    CheckEntry entry;

    Tracker(std::string name, double tol, bool hard = true)
    {
        entry.name = std::move(name);
        entry.tolerance = tol;
        entry.hard = hard;
    }

    template <class Loc>
    void see(double violation, Loc&& where)
    {
        if (std::isnan(violation)) violation = INFINITY;
        if (violation > entry.max_violation || entry.location.empty()) {
            entry.max_violation = std::max(entry.max_violation, violation);
            entry.location = where();
        }
    }

    CheckEntry done()
    {
        entry.passed = entry.max_violation <= entry.tolerance;
        return entry;
    }
};

// Values of one surviving coordinate on a 1-D grid.
struct Axis {
    int i = 0;
    std::vector<double> x, f, d1, d2;
    std::vector<std::vector<double>> after_default;  // [l] -> f_i(x, z^l); empty when l == i or defaulted
};

Axis make_axis(PolicySolution const& sol, int i, DefaultState const& z, std::vector<double> const& grid)
{
    Axis ax;
    ax.i = i;
    ax.x = grid;
    auto const& c = sol.component(i, z);
    auto const f1 = c.f.deriv(1);
    auto const f2 = c.f.deriv(2);
    for (double x : grid) {
        ax.f.push_back(c.f(x));
        ax.d1.push_back(f1(x));
        ax.d2.push_back(f2(x));
    }
    ax.after_default.resize(static_cast<std::size_t>(sol.size()));
    for (int l : surviving(z)) {
        if (l == i) continue;
        auto const& lower = sol.component(i, z.with_default(l)).f;
        auto& out = ax.after_default[static_cast<std::size_t>(l)];
        for (double x : grid) out.push_back(lower(x));
    }
    return ax;
}

struct PointTerms {
    double generator = 0.0;
    double max_gradient = -INFINITY;
};

}  // namespace

bool VerificationReport::hard_failure() const
{
    return std::any_of(entries.begin(), entries.end(), [](auto const& e) { return e.hard && !e.passed; });
}

CheckEntry const* VerificationReport::find(std::string const& name) const
{
    for (auto const& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

void VerificationReport::append(VerificationReport const& other)
{
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

VerificationReport check_hjbvi(PolicySolution const& sol, GridSpec const& spec)
{
    auto const& p = sol.params();
    int const n = p.n;
    double const tol = spec.tol;

    Tracker upper("hjbvi.terms_upper", tol);
    Tracker lower("hjbvi.max_term_lower", tol);
    Tracker continuation("hjbvi.continuation_generator", tol);
    Tracker payout("hjbvi.payout_gradient", tol);
    Tracker smooth1("hjbvi.smooth_fit_slope", spec.smooth_fit_tol);
    Tracker smooth2("hjbvi.smooth_fit_curvature", spec.smooth_fit2_tol);
    Tracker concave("hjbvi.concavity", spec.concavity_tol);
    Tracker mixed("hjbvi.mixed_derivatives", 0.0);
    std::mt19937_64 rng(spec.seed);

    for (std::uint32_t mask = 0; mask < p.state_count(); ++mask) {
        DefaultState const z(n, mask);
        auto const alive = surviving(z);
        if (alive.empty()) continue;  // f = 0, nothing to check
        std::size_t const k = alive.size();

        double upper_x = 0.0;
        std::vector<double> bar(k), alpha(k);
        for (std::size_t j = 0; j < k; ++j) {
            auto const& c = sol.component(alive[j], z);
            bar[j] = c.m;
            alpha[j] = p.weights[static_cast<std::size_t>(alive[j])];
            upper_x = std::max(upper_x, c.m + 1.0);
        }

        // One-dimensional smooth fit and concavity per component.
        for (std::size_t j = 0; j < k; ++j) {
            int const i = alive[j];
            auto const& c = sol.component(i, z);
            auto const d1 = c.f.deriv(1);
            auto const d2 = c.f.deriv(2);
            smooth1.see(std::abs(d1.eval(c.m, Side::left) - alpha[j]), [&] { return fmt_component(i, z, c.m); });
            smooth2.see(std::abs(d2.eval(c.m, Side::left)), [&] { return fmt_component(i, z, c.m); });
            int const pts = std::max(2, spec.points_per_axis);
            std::vector<double> xs;
            for (int q = 0; q < pts; ++q) xs.push_back(upper_x * q / (pts - 1));
            for (double b : c.f.breakpoints()) {
                if (b <= upper_x) xs.push_back(b);
            }
            for (double x : xs) {
                for (Side s : {Side::left, Side::right}) {
                    if (x == 0.0 && s == Side::left) continue;
                    concave.see(std::max(0.0, d2.eval(x, s)), [&] { return fmt_component(i, z, x); });
                }
            }
        }
        // f(x, z) = sum_i f_i(x_i, z): d_i d_j f vanishes for i != j by construction.
        mixed.see(0.0, [&] { return "state=" + z.bits(); });

        auto const eval_point = [&](std::span<double const> f, std::span<double const> d1,
                                    std::span<double const> d2,
                                    auto&& after_default) {
            PointTerms t;
            double total = 0.0;
            double g = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                auto const ui = static_cast<std::size_t>(alive[j]);
                total += f[j];
                g += p.drift[ui] * d1[j] + 0.5 * p.vol[ui] * p.vol[ui] * d2[j];
                t.max_gradient = std::max(t.max_gradient, alpha[j] - d1[j]);
            }
            g -= p.discount * total;
            for (int l : alive) {
                double lower_total = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    if (alive[j] != l) lower_total += after_default(j, l);
                }
                g += p.lambda(l, z) * (lower_total - total);
            }
            t.generator = g;
            return t;
        };

        auto const record = [&](PointTerms const& t, std::span<double const> x, std::span<double const> d1) {
            auto const where = [&] { return fmt_point(z, x); };
            upper.see(std::max({0.0, t.generator, t.max_gradient}), where);
            lower.see(std::max(0.0, -std::max(t.generator, t.max_gradient)), where);
            bool inside = true;
            for (std::size_t j = 0; j < k; ++j) {
                if (x[j] >= bar[j]) {
                    inside = false;
                    payout.see(std::abs(alpha[j] - d1[j]), where);
                }
            }
            if (inside) continuation.see(std::abs(t.generator), where);
        };

        std::vector<double> xf(k), ff(k), f1(k), f2(k);
        if (k <= 3) {
            int const pts = std::max(2, spec.points_per_axis);
            std::vector<double> grid(static_cast<std::size_t>(pts));
            for (int q = 0; q < pts; ++q) grid[static_cast<std::size_t>(q)] = upper_x * q / (pts - 1);
            std::vector<Axis> axes;
            for (int i : alive) axes.push_back(make_axis(sol, i, z, grid));

            std::vector<std::size_t> idx(k, 0);
            while (true) {
                for (std::size_t j = 0; j < k; ++j) {
                    xf[j] = axes[j].x[idx[j]];
                    ff[j] = axes[j].f[idx[j]];
                    f1[j] = axes[j].d1[idx[j]];
                    f2[j] = axes[j].d2[idx[j]];
                }
                auto const t = eval_point(ff, f1, f2, [&](std::size_t j, int l) {
                    return axes[j].after_default[static_cast<std::size_t>(l)][idx[j]];
                });
                record(t, xf, f1);
                std::size_t d = 0;
                while (d < k && ++idx[d] == grid.size()) idx[d++] = 0;
                if (d == k) break;
            }
        } else {
            std::uniform_real_distribution<double> unif(0.0, upper_x);
            for (int s = 0; s < spec.random_samples; ++s) {
                for (std::size_t j = 0; j < k; ++j) {
                    auto const& c = sol.component(alive[j], z);
                    xf[j] = unif(rng);
                    ff[j] = c.f(xf[j]);
                    f1[j] = c.f.deriv(1)(xf[j]);
                    f2[j] = c.f.deriv(2)(xf[j]);
                }
                auto const t = eval_point(ff, f1, f2, [&](std::size_t j, int l) {
                    return sol.component(alive[j], z.with_default(l)).f(xf[j]);
                });
                record(t, xf, f1);
            }
        }
    }

    VerificationReport rep;
    for (auto* t : {&upper, &lower, &continuation, &payout, &smooth1, &smooth2, &concave, &mixed}) {
        rep.entries.push_back(t->done());
    }
    return rep;
}

VerificationReport check_orderings(PolicySolution const& sol)
{
    VerificationReport rep;
    int const n = sol.size();
    if (n == 2) {
        DefaultState const both(2, 0u);
        for (int i = 0; i < 2; ++i) {
            DefaultState const zi(2, 1u << (1 - i));
            std::string const name =
                "ordering.m" + std::to_string(i + 1) + "(00)>=m" + std::to_string(i + 1) + "(" + zi.bits() + ")";
            Tracker t(name, 0.0);
            t.see(std::max(0.0, sol.barrier(i, zi) - sol.barrier(i, both)), [&] {
                std::ostringstream os;
                os.precision(17);
                os << "m(00)=" << sol.barrier(i, both) << " m(" << zi.bits() << ")=" << sol.barrier(i, zi);
                return os.str();
            });
            rep.entries.push_back(t.done());
        }
    } else if (n >= 3) {
        Tracker t("ordering.single_default_steps", 0.0, false);
        for (std::uint32_t mask = 0; mask < sol.params().state_count(); ++mask) {
            DefaultState const z(n, mask);
            for (int i : surviving(z)) {
                for (int l : surviving(z)) {
                    if (l == i) continue;
                    auto const zl = z.with_default(l);
                    t.see(std::max(0.0, sol.barrier(i, zl) - sol.barrier(i, z)), [&] {
                        return "subsidiary=" + std::to_string(i + 1) + " state=" + z.bits() + " -> " + zl.bits();
                    });
                }
            }
        }
        rep.entries.push_back(t.done());
    }
    return rep;
}

VerificationReport check_derivatives(PolicySolution const& sol, GridSpec const& spec)
{
    auto const& p = sol.params();
    double const h = spec.fd_step;
    Tracker first("derivatives.first", spec.fd_rel_tol);
    Tracker second("derivatives.second", spec.fd_rel_tol);
    Tracker c2("derivatives.c2_at_barrier", spec.c2_tol);
    Tracker tail("derivatives.affine_tail", 0.0);
    Tracker phi2("derivatives.phi2", 1e-8);

    int const pts = std::max(2, spec.points_per_axis);
    for (std::uint32_t mask = 0; mask < p.state_count(); ++mask) {
        DefaultState const z(p.n, mask);
        for (int i : surviving(z)) {
            auto const& c = sol.component(i, z);
            auto const d1 = c.f.deriv(1);
            auto const d2 = c.f.deriv(2);
            auto const g1 = c.phi2.deriv(1);
            double const top = c.m + 1.0;
            auto const breaks = c.f.breakpoints();
            auto const near_break = [&](double x) {
                if (x < spec.fd_exclusion) return true;
                return std::any_of(breaks.begin(), breaks.end(),
                                   [&](double b) { return std::abs(x - b) < spec.fd_exclusion; });
            };

            std::vector<double> xs;
            double scale2 = 0.0;
            for (int q = 0; q < pts; ++q) {
                double const x = top * q / (pts - 1);
                xs.push_back(x);
                scale2 = std::max(scale2, std::abs(d2(x)));
            }
            for (double x : xs) {
                auto const where = [&] { return fmt_component(i, z, x); };
                if (!near_break(x)) {
                    double const fd1 = (c.f(x + h) - c.f(x - h)) / (2.0 * h);
                    double const exact1 = d1(x);
                    first.see(std::abs(fd1 - exact1) / std::max(std::abs(exact1), 1e-300), where);
                    // Second derivative from differences of the exact slope keeps
                    // rounding at eps/h rather than eps/h^2.
                    double const fd2 = (d1(x + h) - d1(x - h)) / (2.0 * h);
                    double const exact2 = d2(x);
                    second.see(std::abs(fd2 - exact2) / std::max({std::abs(exact2), scale2, 1e-300}), where);
                }
                if (x >= spec.fd_exclusion) {
                    // Five-point stencil: the h^2 error of the plain central
                    // difference is ~ (h theta2)^2 / 6, above 1e-8 for steep roots.
                    double const fdp = (c.phi2(x - 2.0 * h) - 8.0 * c.phi2(x - h) + 8.0 * c.phi2(x + h) -
                                        c.phi2(x + 2.0 * h)) /
                                       (12.0 * h);
                    phi2.see(std::abs(fdp - g1(x)) / std::abs(g1(x)), where);
                }
                if (x > c.m + spec.fd_exclusion) tail.see(std::abs(d2(x)), where);
            }
            c2.see(std::abs(d2.eval(c.m, Side::left) - d2.eval(c.m, Side::right)),
                   [&] { return fmt_component(i, z, c.m); });
        }
    }

    VerificationReport rep;
    for (auto* t : {&first, &second, &c2, &tail, &phi2}) rep.entries.push_back(t->done());
    return rep;
}

VerificationReport verify_all(PolicySolution const& sol, GridSpec const& spec)
{
    VerificationReport rep = check_hjbvi(sol, spec);
    rep.append(check_orderings(sol));
    rep.append(check_derivatives(sol, spec));
    return rep;
}

}  // namespace divbar
