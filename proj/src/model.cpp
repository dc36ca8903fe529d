// SPDX-License-Identifier: Apache-2.0
#include "divbar/model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "divbar/errors.hpp"

namespace divbar {

DefaultState::DefaultState(int n, std::uint32_t mask) : n_(n), mask_(mask)
{
    if (n < 1 || n > kMaxSubsidiaries) {
        throw ContractViolation("DefaultState: n must be in [1, " +
                                std::to_string(kMaxSubsidiaries) + "]");
    }
    if (mask >> n) {
        throw ContractViolation("DefaultState: mask has bits beyond n");
    }
}

DefaultState DefaultState::all_defaulted(int n)
{
    return {n, static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1)};
}

DefaultState DefaultState::from_bits(std::string_view bits)
{
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            mask |= 1u << i;
        } else if (bits[i] != '0') {
            throw ContractViolation("DefaultState: bitstring '" + std::string(bits) +
                                    "' contains characters other than 0/1");
        }
    }
    return {static_cast<int>(bits.size()), mask};
}

int DefaultState::defaulted_count() const noexcept
{
    return std::popcount(mask_);
}

DefaultState DefaultState::with_default(int l) const
{
    if (l < 0 || l >= n_ || defaulted(l)) {
        throw ContractViolation("DefaultState::with_default: subsidiary " +
                                std::to_string(l + 1) + " is not alive in " + bits());
    }
    return {n_, mask_ | (1u << l)};
}

std::string DefaultState::bits() const
{
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i) {
        if (defaulted(i)) s[static_cast<std::size_t>(i)] = '1';
    }
    return s;
}

std::vector<int> surviving(DefaultState const& z)
{
    std::vector<int> out;
    for (int i = 0; i < z.size(); ++i) {
        if (z.alive(i)) out.push_back(i);
    }
    return out;
}

std::vector<std::vector<DefaultState>> states_by_defaults(int n)
{
    if (n < 1 || n > kMaxSubsidiaries) {
        throw ContractViolation("states_by_defaults: n out of range");
    }
    std::vector<std::vector<DefaultState>> groups(static_cast<std::size_t>(n) + 1);
    std::uint32_t const count = 1u << n;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        auto k = std::popcount(mask);
        groups[static_cast<std::size_t>(n - k)].emplace_back(n, mask);
    }
    return groups;
}

double ModelParams::killing_rate(DefaultState const& z) const
{
    double mu = discount;
    for (int l : surviving(z)) mu += lambda(l, z);
    return mu;
}

std::vector<std::vector<double>> expand_intensity_rule(std::vector<double> const& base,
                                                       double factor)
{
    int const n = static_cast<int>(base.size());
    if (n < 1 || n > kMaxSubsidiaries) {
        throw ContractViolation("intensity rule: base must have 1..16 entries");
    }
    std::size_t const count = std::size_t{1} << n;
    std::vector<std::vector<double>> table(count);
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        DefaultState z(n, mask);
        auto& row = table[mask];
        row.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
        double const scale = std::pow(factor, z.defaulted_count());
        for (int i : surviving(z)) row[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)] * scale;
    }
    return table;
}

namespace {

std::string fmt_num(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_positive_vector(std::vector<double> const& v, int n, char const* name,
                           std::vector<Violation>& out)
{
    if (static_cast<int>(v.size()) != n) {
        out.push_back({name, std::string(name) + " has " + std::to_string(v.size()) +
                                 " entries, expected " + std::to_string(n)});
        return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            out.push_back({name, std::string(name) + "[" + std::to_string(i + 1) +
                                     "] = " + fmt_num(v[i]) + " must be positive"});
        }
    }
}

}  // namespace

std::vector<Violation> validate(ModelParams const& p)
{
    std::vector<Violation> out;
    if (p.n < 1 || p.n > kMaxSubsidiaries) {
        out.push_back({"n", "n = " + std::to_string(p.n) + " must be in [1, 16]"});
        return out;
    }
    int const n = p.n;
    check_positive_vector(p.drift, n, "drift", out);
    check_positive_vector(p.vol, n, "vol", out);
    check_positive_vector(p.weights, n, "weights", out);
    if (!(p.discount > 0.0) || !std::isfinite(p.discount)) {
        out.push_back({"discount", "discount = " + fmt_num(p.discount) + " must be positive"});
    }
    if (static_cast<int>(p.weights.size()) == n) {
        double sum = 0.0;
        for (double w : p.weights) sum += w;
        if (std::abs(sum - 1.0) > 1e-12) {
            out.push_back({"weights", "weights sum to " + fmt_num(sum) + ", expected 1"});
        }
    }

    bool corr_shape_ok = static_cast<int>(p.corr.size()) == n;
    for (auto const& row : p.corr) corr_shape_ok = corr_shape_ok && static_cast<int>(row.size()) == n;
    if (!corr_shape_ok) {
        out.push_back({"corr", "corr must be an n x n matrix"});
    } else {
        bool entries_ok = true;
        for (int i = 0; i < n; ++i) {
            auto const ui = static_cast<std::size_t>(i);
            if (p.corr[ui][ui] != 1.0) {
                out.push_back({"corr", "corr[" + std::to_string(i + 1) + "][" +
                                           std::to_string(i + 1) + "] must be 1"});
                entries_ok = false;
            }
            for (int j = 0; j < n; ++j) {
                auto const uj = static_cast<std::size_t>(j);
                double const v = p.corr[ui][uj];
                if (!(v >= -1.0 && v <= 1.0)) {
                    out.push_back({"corr", "corr entry (" + std::to_string(i + 1) + "," +
                                               std::to_string(j + 1) + ") outside [-1,1]"});
                    entries_ok = false;
                }
                if (j > i && v != p.corr[uj][ui]) {
                    out.push_back({"corr", "corr is not symmetric at (" + std::to_string(i + 1) +
                                               "," + std::to_string(j + 1) + ")"});
                    entries_ok = false;
                }
            }
        }
        if (entries_ok) {
            try {
                (void)cholesky(p.corr);
            } catch (ContractViolation const& e) {
                out.push_back({"corr", e.what()});
            }
        }
    }

    std::size_t const count = std::size_t{1} << n;
    if (p.intensity.size() != count) {
        out.push_back({"intensity", "intensity table has " + std::to_string(p.intensity.size()) +
                                        " rows, expected " + std::to_string(count)});
        return out;
    }
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        if (static_cast<int>(p.intensity[mask].size()) != n) {
            out.push_back({"intensity", "intensity row for state " + DefaultState(n, mask).bits() +
                                            " must have n entries"});
            return out;
        }
    }
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        DefaultState z(n, mask);
        for (int i : surviving(z)) {
            double const li = p.lambda(i, z);
            if (!(li > 0.0) || !std::isfinite(li)) {
                out.push_back({"intensity", "lambda_" + std::to_string(i + 1) + "(" + z.bits() +
                                                ") = " + fmt_num(li) + " must be positive"});
                continue;
            }
            // Chains of single-default steps cover every comparable pair.
            for (int l : surviving(z)) {
                if (l == i) continue;
                auto const zl = z.with_default(l);
                double const next = p.lambda(i, zl);
                if (next < li) {
                    out.push_back({"intensity", "contagion monotonicity: lambda_" +
                                                    std::to_string(i + 1) + "(" + zl.bits() +
                                                    ") = " + fmt_num(next) + " < lambda_" +
                                                    std::to_string(i + 1) + "(" + z.bits() +
                                                    ") = " + fmt_num(li)});
                }
            }
        }
    }
    return out;
}

void require_valid(ModelParams const& params)
{
    auto const violations = validate(params);
    if (violations.empty()) return;
    std::string msg = "invalid model parameters:";
    for (auto const& v : violations) msg += "\n  " + v.field + ": " + v.message;
    throw ContractViolation(msg);
}

std::vector<double> cholesky(std::vector<std::vector<double>> const& corr)
{
    auto const n = corr.size();
    for (double jitter : {0.0, 1e-12, 1e-11, 1e-10}) {
        std::vector<double> L(n * n, 0.0);
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            double d = corr[j][j] + jitter;
            for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
            if (!(d > 0.0)) {
                ok = false;
                break;
            }
            double const ljj = std::sqrt(d);
            L[j * n + j] = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = corr[i][j];
                for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
                L[i * n + j] = s / ljj;
            }
        }
        if (ok) return L;
    }
    throw ContractViolation("corr is not positive semi-definite (Cholesky failed with 1e-10 jitter)");
}

}  // namespace divbar
