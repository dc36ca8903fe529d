// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

namespace divbar {

/// c * x^k * e^{rate x}
struct ExpPolyTerm {
    double coeff = 0.0;
    int power = 0;
    double rate = 0.0;

    friend bool operator==(ExpPolyTerm const&, ExpPolyTerm const&) = default;
};

/// Exponents above this make evaluation throw std::out_of_range.
inline constexpr double kMaxExponent = 700.0;

/**
 * Finite sum of ExpPolyTerm.
 *
 * Terms are kept canonical: sorted by (rate, power), duplicates merged with
 * exact key comparison, and coefficients below 1e-300 in magnitude dropped.
 */
class ExpPolyPiece {
public:
    ExpPolyPiece() = default;
    explicit ExpPolyPiece(std::vector<ExpPolyTerm> terms);

    static ExpPolyPiece affine(double intercept, double slope);
    static ExpPolyPiece exponential(double coeff, double rate);

    std::span<ExpPolyTerm const> terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    double eval(double x) const;
    ExpPolyPiece deriv() const;
    /// Some antiderivative (integration constant chosen as zero in the
    /// family's natural basis).
    ExpPolyPiece antideriv() const;
    /// Multiply by e^{rate x}.
    ExpPolyPiece times_exp(double rate) const;
    ExpPolyPiece scaled(double c) const;

    friend ExpPolyPiece operator+(ExpPolyPiece const& a, ExpPolyPiece const& b);
    friend ExpPolyPiece operator-(ExpPolyPiece const& a, ExpPolyPiece const& b);

private:
    std::vector<ExpPolyTerm> terms_;
};

enum class Side { left, right };

/**
 * Piecewise exp-poly function on [0, inf).
 *
 * breakpoints() = {0 = x_0 < x_1 < ... < x_K}; piece j lives on
 * [x_j, x_{j+1}) and the last piece extends to infinity. For value functions
 * the last piece is affine.
 */
class ExpPolyPiecewise {
public:
    ExpPolyPiecewise();
    ExpPolyPiecewise(std::vector<double> breakpoints, std::vector<ExpPolyPiece> pieces);

    static ExpPolyPiecewise zero() { return {}; }
    static ExpPolyPiecewise whole(ExpPolyPiece piece);

    std::span<double const> breakpoints() const noexcept { return breaks_; }
    std::span<ExpPolyPiece const> pieces() const noexcept { return pieces_; }
    ExpPolyPiece const& tail() const noexcept { return pieces_.back(); }
    bool is_zero() const noexcept;

    /// Index of the piece used at x. With Side::left a breakpoint belongs to
    /// the piece on its left.
    std::size_t piece_index(double x, Side side = Side::right) const;

    /// Value at x >= 0 (ContractViolation for x < 0, std::out_of_range when
    /// an exponent exceeds kMaxExponent).
    double eval(double x, Side side = Side::right) const;
    double operator()(double x) const { return eval(x); }

    /// Derivative of the given order (0 returns a copy).
    ExpPolyPiecewise deriv(int order = 1) const;

    /// Largest |jump| in value (relative to max(1,|f|)) and in first
    /// derivative (absolute) over all interior breakpoints.
    struct Continuity {
        double value_jump = 0.0;
        double slope_jump = 0.0;
    };
    Continuity continuity() const;

private:
    std::vector<double> breaks_;
    std::vector<ExpPolyPiece> pieces_;
};

ExpPolyPiecewise add(ExpPolyPiecewise const& f, ExpPolyPiecewise const& g);
ExpPolyPiecewise scale(ExpPolyPiecewise const& f, double c);

/// f on [0, a], continued beyond a by its tangent line at a (taken from the
/// left), i.e. f(a) + f'(a)(x - a).
ExpPolyPiecewise shift_truncate(ExpPolyPiecewise const& f, double a);

/**
 * Particular solution of (1/2) s^2 g'' + nu g' - mu g + h = 0 with
 * g(0) = g'(0) = 0, written as the Green-kernel convolution
 *
 *   -2/(s^2 (t1 + t2)) * int_0^x h(u) (e^{t1 (x-u)} - e^{-t2 (x-u)}) du
 *
 * where t1 > 0 and -t2 < 0 are the characteristic roots. Computed in closed
 * form segment by segment. A term u^k e^{beta u} whose rate nearly matches
 * t1 or -t2 (gap s with k!/|s|^{k+1} > 1e3) is integrated as a power series
 * in s u on [0, 1/|s|], so the output gains a breakpoint at 1/|s| there;
 * otherwise breakpoints are those of h. Requires |h(0)| <= 1e-9.
 */
ExpPolyPiecewise convolve_green(ExpPolyPiecewise const& h, double theta1, double theta2,
                                double sigma);

/// JSON record: {"breakpoints": [...], "pieces": [[[c, k, rate], ...], ...]}.
std::string to_json(ExpPolyPiecewise const& f);
ExpPolyPiecewise piecewise_from_json(std::string const& text);

}  // namespace divbar
