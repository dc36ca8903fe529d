// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "divbar/model.hpp"

namespace divbar {

class PolicySolution;

struct SimConfig {
    double dt = 1e-3;
    /// Truncation time T; <= 0 selects T = 20 / r.
    double horizon = 0.0;
    std::int64_t paths = 10000;
    std::uint64_t seed = 1;
    /// Pairs of paths share default clocks and use mirrored Brownian increments.
    bool antithetic = true;
    int threads = 1;

    double effective_horizon(double discount) const { return horizon > 0.0 ? horizon : 20.0 / discount; }
};

/// Barrier level per (subsidiary, state); NaN where the subsidiary has
/// defaulted. Levels need not be optimal.
class BarrierPolicy {
public:
    BarrierPolicy(int n, std::vector<double> levels);

    /// Optimal barriers m_i(z) scaled by a common factor.
    static BarrierPolicy from_solution(PolicySolution const& sol, double scale = 1.0);

    int size() const noexcept { return n_; }
    double level(int i, DefaultState const& z) const
    {
        return levels_[static_cast<std::size_t>(z.mask()) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)];
    }
    /// Largest level subsidiary i ever uses.
    double max_level(int i) const;

private:
    int n_;
    std::vector<double> levels_;
};

struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t paths_used = 0;
    /// E[alpha_i int e^{-rt} dD_i]; sums to estimate.
    std::vector<double> per_subsidiary;
    std::vector<double> per_subsidiary_se;
    /// Upper bound on the discounted dividends lost by truncating at T.
    double tail_bound = 0.0;
    double horizon = 0.0;
    /// Paths whose discounted dividends exceeded the crude per-path bound.
    std::int64_t bound_violations = 0;
};

/**
 * Monte Carlo estimate of the weighted discounted dividends paid by the
 * barrier policy from (x0, z0).
 *
 * Each path: lump payment down to the barriers at t = 0; Euler steps of
 * the correlated surpluses followed by reflection at m_i(z); absorption at
 * the first step that ends below zero; default times from competing
 * exponential clocks redrawn at each default. A defaulting line is paid
 * nothing at its default instant; the survivors are immediately clamped to
 * their new barriers.
 *
 * Paths use per-path random streams derived from (seed, path index), so
 * the result does not depend on the thread count.
 */
SimResult simulate_policy(ModelParams const& params, BarrierPolicy const& policy, std::span<double const> x0,
                          DefaultState const& z0, SimConfig const& cfg);

struct PolicyComparisonRow {
    double scale = 1.0;
    SimResult result;
};

/// simulate_policy for each uniformly scaled optimal barrier map, with
/// common random numbers (same seed for every scale).
std::vector<PolicyComparisonRow> compare_policies(ModelParams const& params, PolicySolution const& sol,
                                                  std::span<double const> scales, std::span<double const> x0,
                                                  DefaultState const& z0, SimConfig const& cfg);

struct MartingaleCheck {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Empirical mean of Z_i(T) - int_0^{T ^ sigma_i} lambda_i(Z(s)) ds per
/// subsidiary, from simulated default chains started at z0.
MartingaleCheck default_martingale_check(ModelParams const& params, DefaultState const& z0, double horizon,
                                         std::int64_t paths, std::uint64_t seed);

}  // namespace divbar
