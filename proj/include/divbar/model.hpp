// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace divbar {

/// Hard cap on the number of subsidiaries; the lattice has 2^n states.
inline constexpr int kMaxSubsidiaries = 16;

/**
 * Element of {0,1}^n. Bit i is set when subsidiary i (0-based) has defaulted.
 *
 * Textual form is a bitstring whose leftmost character is subsidiary 1, so
 * "01" means subsidiary 2 has defaulted and subsidiary 1 is alive.
 */
class DefaultState {
public:
    DefaultState() = default;
    DefaultState(int n, std::uint32_t mask);

    static DefaultState all_alive(int n) { return {n, 0u}; }
    static DefaultState all_defaulted(int n);
    static DefaultState from_bits(std::string_view bits);

    int size() const noexcept { return n_; }
    std::uint32_t mask() const noexcept { return mask_; }
    bool defaulted(int i) const noexcept { return (mask_ >> i) & 1u; }
    bool alive(int i) const noexcept { return !defaulted(i); }
    int defaulted_count() const noexcept;

    /// The neighbour state in which subsidiary l has also defaulted.
    /// Throws ContractViolation when l is already defaulted.
    DefaultState with_default(int l) const;

    std::string bits() const;

    friend bool operator==(DefaultState const&, DefaultState const&) = default;

private:
    int n_ = 0;
    std::uint32_t mask_ = 0;
};

/// Ascending 0-based indices of the subsidiaries alive in z.
std::vector<int> surviving(DefaultState const& z);

/// All 2^n states grouped by defaulted count, all-defaulted group first.
std::vector<std::vector<DefaultState>> states_by_defaults(int n);

/**
 * Market and contagion parameters for an n-line group.
 *
 * Intensities are stored densely: row `mask` holds lambda_i(z) for every i;
 * entries with z_i = 1 are ignored (NaN after rule expansion).
 */
struct ModelParams {
    int n = 0;
    std::vector<double> drift;                 // a_i
    std::vector<double> vol;                   // b_i
    std::vector<std::vector<double>> corr;     // rho_ij
    double discount = 0.0;                     // r
    std::vector<double> weights;               // alpha_i
    std::vector<std::vector<double>> intensity;  // [mask][i]

    double lambda(int i, DefaultState const& z) const
    {
        return intensity[z.mask()][static_cast<std::size_t>(i)];
    }

    /// r + sum of lambda_l(z) over surviving l.
    double killing_rate(DefaultState const& z) const;

    std::size_t state_count() const noexcept { return std::size_t{1} << n; }
};

/// Dense intensity table from lambda_i(z) = base_i * factor^{#defaults(z)}.
std::vector<std::vector<double>> expand_intensity_rule(std::vector<double> const& base,
                                                       double factor);

struct Violation {
    std::string field;
    std::string message;
};

/// Every violated invariant; empty iff params are valid.
std::vector<Violation> validate(ModelParams const& params);

/// Throws ContractViolation listing every violation.
void require_valid(ModelParams const& params);

/**
 * Lower Cholesky factor of a correlation matrix (row-major, n x n).
 *
 * A diagonal jitter of up to 1e-10 is tried before giving up, so exactly
 * singular matrices such as rho = +-1 are accepted.
 * Throws ContractViolation when the matrix is not positive semi-definite.
 */
std::vector<double> cholesky(std::vector<std::vector<double>> const& corr);

}  // namespace divbar
