// SPDX-License-Identifier: Apache-2.0
#include "divbar/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "divbar/errors.hpp"
#include "divbar/recursion.hpp"

namespace divbar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `stream` for path unit `unit`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t unit, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(unit * 2 + stream + 0x5bd1e995ULL));
}

using Engine = boost::random::mt19937_64;

class PathSimulator {
public:
    PathSimulator(ModelParams const& params, BarrierPolicy const& policy, std::span<double const> x0,
                  DefaultState const& z0, SimConfig const& cfg)
        : p_(params),
          policy_(policy),
          x0_(x0.begin(), x0.end()),
          z0_(z0),
          dt_(cfg.dt),
          horizon_(cfg.effective_horizon(params.discount)),
          chol_(cholesky(params.corr)),
          n_(params.n),
          step_discount_(std::exp(-params.discount * cfg.dt)),
          sqrt_dt_(std::sqrt(cfg.dt))
    {
    }

    // sign = +1 or -1 mirrors the Brownian increments.
    void run(std::uint64_t diffusion_seed, std::uint64_t default_seed, double sign, std::vector<double>& acc) const
    {
        auto const n = static_cast<std::size_t>(n_);
        Engine diffusion(diffusion_seed);
        Engine defaults(default_seed);
        boost::random::normal_distribution<double> normal;
        boost::random::exponential_distribution<double> expo;

        acc.assign(n, 0.0);
        std::vector<double> x(x0_);
        std::vector<char> active(n, 0);  // alive and not ruined
        std::vector<double> clocks(n, kInf);
        std::vector<double> xi(n), dw(n), lev(n, 0.0);
        DefaultState z = z0_;
        std::size_t n_active = 0;
        auto const deactivate = [&](std::size_t i) {
            if (active[i]) --n_active;
            active[i] = 0;
        };
        auto const load_levels = [&] {
            for (int i : surviving(z)) lev[static_cast<std::size_t>(i)] = policy_.level(i, z);
        };
        for (int i : surviving(z)) {
            active[static_cast<std::size_t>(i)] = 1;
            ++n_active;
        }
        load_levels();

        double t = 0.0;
        double disc = 1.0;
        auto clamp_all = [&](double d) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!active[i]) continue;
                double const m = lev[i];
                if (x[i] > m) {
                    acc[i] += p_.weights[i] * d * (x[i] - m);
                    x[i] = m;
                }
                // A surplus held at exactly 0 leaves [0, inf) immediately.
                if (x[i] <= 0.0) deactivate(i);
            }
        };
        double next_default = kInf;
        auto draw_clocks = [&] {
            for (std::size_t i = 0; i < n; ++i) {
                clocks[i] = z.defaulted(static_cast<int>(i))
                                ? kInf
                                : t + expo(defaults) / p_.lambda(static_cast<int>(i), z);
            }
            next_default = *std::min_element(clocks.begin(), clocks.end());
        };
        auto diffuse = [&](double len, double sq, double d_end) {
            for (std::size_t i = 0; i < n; ++i) xi[i] = sign * normal(diffusion);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k <= i; ++k) s += chol_[i * n + k] * xi[k];
                dw[i] = s * sq;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!active[i]) continue;
                x[i] += p_.drift[i] * len - p_.vol[i] * dw[i];
                if (x[i] < 0.0) {
                    deactivate(i);
                    continue;
                }
                double const m = lev[i];
                if (x[i] > m) {
                    acc[i] += p_.weights[i] * d_end * (x[i] - m);
                    x[i] = m;
                    if (m <= 0.0) deactivate(i);
                }
            }
        };

        clamp_all(1.0);
        draw_clocks();
        while (t < horizon_) {
            if (n_active == 0) break;
            bool const full_step = t + dt_ <= horizon_;
            double const step_end = full_step ? t + dt_ : horizon_;
            if (next_default < step_end) {
                double const tau = next_default;
                double const d_tau = std::exp(-p_.discount * tau);
                diffuse(tau - t, std::sqrt(tau - t), d_tau);
                t = tau;
                disc = d_tau;
                auto const l = static_cast<std::size_t>(std::min_element(clocks.begin(), clocks.end()) - clocks.begin());
                z = z.with_default(static_cast<int>(l));
                deactivate(l);
                load_levels();
                clamp_all(disc);
                draw_clocks();
                continue;
            }
            double const d_end = full_step ? disc * step_discount_ : std::exp(-p_.discount * step_end);
            if (full_step) {
                diffuse(dt_, sqrt_dt_, d_end);
            } else {
                diffuse(step_end - t, std::sqrt(step_end - t), d_end);
            }
            t = step_end;
            disc = d_end;
        }
    }

    double horizon() const { return horizon_; }

private:
    ModelParams const& p_;
    BarrierPolicy const& policy_;
    std::vector<double> x0_;
    DefaultState z0_;
    double dt_;
    double horizon_;
    std::vector<double> chol_;
    int n_;
    double step_discount_;
    double sqrt_dt_;
};

template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn)
{
    int const workers = std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::int64_t>(count, 1 << 20))));
    if (workers == 1) {
        for (std::int64_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::int64_t k = next++; k < count; k = next++) fn(k);
        });
    }
}

}  // namespace

BarrierPolicy::BarrierPolicy(int n, std::vector<double> levels) : n_(n), levels_(std::move(levels))
{
    if (levels_.size() != (std::size_t{1} << n) * static_cast<std::size_t>(n)) {
        throw ContractViolation("BarrierPolicy: need 2^n * n levels");
    }
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        DefaultState z(n, mask);
        for (int i : surviving(z)) {
            if (!(level(i, z) >= 0.0)) {
                throw ContractViolation("BarrierPolicy: level for subsidiary " + std::to_string(i + 1) +
                                        " in state " + z.bits() + " must be >= 0");
            }
        }
    }
}

BarrierPolicy BarrierPolicy::from_solution(PolicySolution const& sol, double scale)
{
    int const n = sol.size();
    std::vector<double> levels((std::size_t{1} << n) * static_cast<std::size_t>(n),
                               std::numeric_limits<double>::quiet_NaN());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        DefaultState z(n, mask);
        for (int i : surviving(z)) levels[mask * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = scale * sol.barrier(i, z);
    }
    return {n, std::move(levels)};
}

double BarrierPolicy::max_level(int i) const
{
    double out = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n_); ++mask) {
        DefaultState z(n_, mask);
        if (z.alive(i)) out = std::max(out, level(i, z));
    }
    return out;
}

SimResult simulate_policy(ModelParams const& params, BarrierPolicy const& policy, std::span<double const> x0,
                          DefaultState const& z0, SimConfig const& cfg)
{
    require_valid(params);
    auto const n = static_cast<std::size_t>(params.n);
    if (policy.size() != params.n || x0.size() != n || z0.size() != params.n) {
        throw ContractViolation("simulate_policy: dimension mismatch");
    }
    for (double v : x0) {
        if (!(v >= 0.0)) throw ContractViolation("simulate_policy: x0 entries must be >= 0");
    }
    double const horizon = cfg.effective_horizon(params.discount);
    if (!(cfg.dt > 0.0) || !(cfg.dt < horizon)) {
        throw ContractViolation("simulate_policy: need 0 < dt < horizon");
    }
    if (cfg.paths < 2) throw ContractViolation("simulate_policy: need at least 2 paths");

    PathSimulator const sim(params, policy, x0, z0, cfg);
    std::int64_t const per_unit = cfg.antithetic ? 2 : 1;
    std::int64_t const units = cfg.paths / per_unit;
    if (units < 2) throw ContractViolation("simulate_policy: need at least 2 sampling units");

    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        bound += params.weights[i] * (x0[i] + policy.max_level(static_cast<int>(i)) + params.drift[i] / params.discount);
    }

    std::vector<double> unit_sub(static_cast<std::size_t>(units) * n, 0.0);
    std::vector<std::uint8_t> violated(static_cast<std::size_t>(units), 0);
    parallel_for(units, cfg.threads, [&](std::int64_t u) {
        auto const uu = static_cast<std::uint64_t>(u);
        std::uint64_t const ds = stream_seed(cfg.seed, uu, 0);
        std::uint64_t const cs = stream_seed(cfg.seed, uu, 1);
        std::vector<double> acc;
        double* out = unit_sub.data() + static_cast<std::size_t>(u) * n;
        for (std::int64_t rep = 0; rep < per_unit; ++rep) {
            sim.run(ds, cs, rep == 0 ? 1.0 : -1.0, acc);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                out[i] += acc[i] / static_cast<double>(per_unit);
                total += acc[i];
            }
            if (total < 0.0 || total > bound) violated[static_cast<std::size_t>(u)] = 1;
        }
    });

    SimResult res;
    res.paths_used = units * per_unit;
    res.horizon = horizon;
    res.per_subsidiary.assign(n, 0.0);
    res.per_subsidiary_se.assign(n, 0.0);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> sub_sq(n, 0.0);
    for (std::int64_t u = 0; u < units; ++u) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double const v = unit_sub[static_cast<std::size_t>(u) * n + i];
            res.per_subsidiary[i] += v;
            sub_sq[i] += v * v;
            total += v;
        }
        sum += total;
        sum_sq += total * total;
        res.bound_violations += violated[static_cast<std::size_t>(u)];
    }
    double const dn = static_cast<double>(units);
    auto se = [dn](double s, double ss) {
        double const mean = s / dn;
        double const var = std::max(0.0, (ss - dn * mean * mean) / (dn - 1.0));
        return std::sqrt(var / dn);
    };
    res.estimate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.per_subsidiary_se[i] = se(res.per_subsidiary[i], sub_sq[i]);
        res.per_subsidiary[i] /= dn;
        res.estimate += res.per_subsidiary[i];
    }
    res.std_error = se(sum, sum_sq);
    res.tail_bound = std::exp(-params.discount * horizon) * bound;
    return res;
}

std::vector<PolicyComparisonRow> compare_policies(ModelParams const& params, PolicySolution const& sol,
                                                  std::span<double const> scales, std::span<double const> x0,
                                                  DefaultState const& z0, SimConfig const& cfg)
{
    std::vector<PolicyComparisonRow> rows;
    for (double s : scales) {
        rows.push_back({s, simulate_policy(params, BarrierPolicy::from_solution(sol, s), x0, z0, cfg)});
    }
    return rows;
}

MartingaleCheck default_martingale_check(ModelParams const& params, DefaultState const& z0, double horizon,
                                         std::int64_t paths, std::uint64_t seed)
{
    require_valid(params);
    if (!(horizon > 0.0) || paths < 2) throw ContractViolation("default_martingale_check: bad horizon/paths");
    auto const n = static_cast<std::size_t>(params.n);
    std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
    boost::random::exponential_distribution<double> expo;
    for (std::int64_t p = 0; p < paths; ++p) {
        Engine eng(stream_seed(seed, static_cast<std::uint64_t>(p), 1));
        DefaultState z = z0;
        double t = 0.0;
        std::vector<double> compensator(n, 0.0);
        while (t < horizon && z.defaulted_count() < params.n) {
            double next = kInf;
            int who = -1;
            for (int i : surviving(z)) {
                double const c = t + expo(eng) / params.lambda(i, z);
                if (c < next) {
                    next = c;
                    who = i;
                }
            }
            double const until = std::min(next, horizon);
            for (int i : surviving(z)) compensator[static_cast<std::size_t>(i)] += params.lambda(i, z) * (until - t);
            t = until;
            if (next <= horizon) z = z.with_default(who);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double const m = (z.defaulted(static_cast<int>(i)) && !z0.defaulted(static_cast<int>(i)) ? 1.0 : 0.0) -
                             compensator[i];
            sum[i] += m;
            sum_sq[i] += m * m;
        }
    }
    MartingaleCheck out;
    double const dn = static_cast<double>(paths);
    for (std::size_t i = 0; i < n; ++i) {
        double const mean = sum[i] / dn;
        double const var = std::max(0.0, (sum_sq[i] - dn * mean * mean) / (dn - 1.0));
        out.mean.push_back(mean);
        out.std_error.push_back(std::sqrt(var / dn));
    }
    return out;
}

}  // namespace divbar
