// SPDX-License-Identifier: Apache-2.0
#include "divbar/expfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "divbar/errors.hpp"

namespace divbar {

namespace {

double ipow(double x, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// Antiderivative of x^k e^{s x} as exp-poly terms (s != 0):
//   e^{sx} * sum_j (-1)^j k!/(k-j)! x^{k-j} / s^{j+1}
void append_power_exp_antideriv(double c, int k, double s, double rate_out,
                                std::vector<ExpPolyTerm>& out)
{
    double falling = 1.0;  // k!/(k-j)!
    double inv_s = 1.0 / s;
    double s_pow = inv_s;  // 1/s^{j+1}
    for (int j = 0; j <= k; ++j) {
        double const sign = (j % 2 == 0) ? 1.0 : -1.0;
        out.push_back({c * sign * falling * s_pow, k - j, rate_out});
        falling *= static_cast<double>(k - j);
        s_pow *= inv_s;
    }
}

// Value of the antiderivative above at a point (exponential included).
double power_exp_antideriv_at(int k, double s, double u)
{
    if (s * u > kMaxExponent) throw std::out_of_range("convolve_green: exponent overflow");
    double falling = 1.0;
    double inv_s = 1.0 / s;
    double s_pow = inv_s;
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
        double const sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc += sign * falling * s_pow * ipow(u, k - j);
        falling *= static_cast<double>(k - j);
        s_pow *= inv_s;
    }
    return std::exp(s * u) * acc;
}

// Closed-form antiderivatives of u^k e^{s u} carry coefficients up to
// k!/|s|^{k+1} that cancel when |s| u is small. Above this amplification
// the convolution switches to the power series of int_0^u on |s| u <= 1.
constexpr double kSeriesAmplification = 1e3;

bool near_resonant(int k, double s)
{
    return std::lgamma(k + 1.0) - (k + 1.0) * std::log(std::abs(s)) > std::log(kSeriesAmplification);
}

// Highest series index m with (|s| x_end)^m / m! above 1e-17.
int series_order(double s, double x_end)
{
    if (s == 0.0) return 0;
    double const z = std::abs(s) * x_end;
    double t = 1.0;
    int m = 0;
    while (m < 60) {
        t *= z / (m + 1);
        if (t < 1e-17) break;
        ++m;
    }
    return m;
}

// int_0^x u^k e^{s u} du = sum_m s^m x^{k+m+1} / (m! (k+m+1)), times e^{rate_out x}.
void append_series_antideriv(double c, int k, double s, int order, double rate_out, std::vector<ExpPolyTerm>& out)
{
    double coef = c;
    for (int m = 0; m <= order; ++m) {
        out.push_back({coef / (k + m + 1), k + m + 1, rate_out});
        coef *= s / (m + 1);
    }
}

double series_antideriv_at(int k, double s, int order, double u)
{
    double coef = 1.0;
    double acc = 0.0;
    for (int m = 0; m <= order; ++m) {
        acc += coef / (k + m + 1) * ipow(u, k + m + 1);
        coef *= s / (m + 1);
    }
    return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExpPolyPiece

ExpPolyPiece::ExpPolyPiece(std::vector<ExpPolyTerm> terms)
{
    std::sort(terms.begin(), terms.end(), [](ExpPolyTerm const& a, ExpPolyTerm const& b) {
        return a.rate < b.rate || (a.rate == b.rate && a.power < b.power);
    });
    for (auto const& t : terms) {
        if (t.power < 0) throw ContractViolation("ExpPolyTerm: negative power");
        if (!terms_.empty() && terms_.back().rate == t.rate && terms_.back().power == t.power) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](ExpPolyTerm const& t) { return std::abs(t.coeff) < 1e-300; });
}

ExpPolyPiece ExpPolyPiece::affine(double intercept, double slope)
{
    return ExpPolyPiece({{intercept, 0, 0.0}, {slope, 1, 0.0}});
}

ExpPolyPiece ExpPolyPiece::exponential(double coeff, double rate)
{
    return ExpPolyPiece({{coeff, 0, rate}});
}

double ExpPolyPiece::eval(double x) const
{
    double acc = 0.0;
    for (auto const& t : terms_) {
        double const e = t.rate * x;
        if (e > kMaxExponent) {
            throw std::out_of_range("exp-poly evaluation overflow: rate*x = " + std::to_string(e));
        }
        acc += t.coeff * ipow(x, t.power) * (t.rate == 0.0 ? 1.0 : std::exp(e));
    }
    return acc;
}

ExpPolyPiece ExpPolyPiece::deriv() const
{
    std::vector<ExpPolyTerm> out;
    out.reserve(2 * terms_.size());
    for (auto const& t : terms_) {
        if (t.power > 0) out.push_back({t.coeff * t.power, t.power - 1, t.rate});
        if (t.rate != 0.0) out.push_back({t.coeff * t.rate, t.power, t.rate});
    }
    return ExpPolyPiece(std::move(out));
}

ExpPolyPiece ExpPolyPiece::antideriv() const
{
    std::vector<ExpPolyTerm> out;
    for (auto const& t : terms_) {
        if (t.rate == 0.0) {
            out.push_back({t.coeff / (t.power + 1), t.power + 1, 0.0});
        } else {
            append_power_exp_antideriv(t.coeff, t.power, t.rate, t.rate, out);
        }
    }
    return ExpPolyPiece(std::move(out));
}

ExpPolyPiece ExpPolyPiece::times_exp(double rate) const
{
    std::vector<ExpPolyTerm> out(terms_.begin(), terms_.end());
    for (auto& t : out) t.rate += rate;
    return ExpPolyPiece(std::move(out));
}

ExpPolyPiece ExpPolyPiece::scaled(double c) const
{
    std::vector<ExpPolyTerm> out(terms_.begin(), terms_.end());
    for (auto& t : out) t.coeff *= c;
    return ExpPolyPiece(std::move(out));
}

ExpPolyPiece operator+(ExpPolyPiece const& a, ExpPolyPiece const& b)
{
    std::vector<ExpPolyTerm> out(a.terms_.begin(), a.terms_.end());
    out.insert(out.end(), b.terms_.begin(), b.terms_.end());
    return ExpPolyPiece(std::move(out));
}

ExpPolyPiece operator-(ExpPolyPiece const& a, ExpPolyPiece const& b)
{
    return a + b.scaled(-1.0);
}

// ---------------------------------------------------------------------------
// ExpPolyPiecewise

ExpPolyPiecewise::ExpPolyPiecewise() : breaks_{0.0}, pieces_(1) {}

ExpPolyPiecewise::ExpPolyPiecewise(std::vector<double> breakpoints, std::vector<ExpPolyPiece> pieces)
    : breaks_(std::move(breakpoints)), pieces_(std::move(pieces))
{
    if (breaks_.empty() || breaks_.front() != 0.0) {
        throw ContractViolation("ExpPolyPiecewise: breakpoints must start at 0");
    }
    if (pieces_.size() != breaks_.size()) {
        throw ContractViolation("ExpPolyPiecewise: need one piece per breakpoint");
    }
    for (std::size_t j = 1; j < breaks_.size(); ++j) {
        if (!(breaks_[j] > breaks_[j - 1]) || !std::isfinite(breaks_[j])) {
            throw ContractViolation("ExpPolyPiecewise: breakpoints must be strictly ascending");
        }
    }
}

ExpPolyPiecewise ExpPolyPiecewise::whole(ExpPolyPiece piece)
{
    return ExpPolyPiecewise({0.0}, {std::move(piece)});
}

bool ExpPolyPiecewise::is_zero() const noexcept
{
    return std::all_of(pieces_.begin(), pieces_.end(), [](auto const& p) { return p.is_zero(); });
}

std::size_t ExpPolyPiecewise::piece_index(double x, Side side) const
{
    auto it = (side == Side::right) ? std::upper_bound(breaks_.begin(), breaks_.end(), x)
                                    : std::lower_bound(breaks_.begin(), breaks_.end(), x);
    auto idx = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    return idx == 0 ? 0 : idx - 1;
}

double ExpPolyPiecewise::eval(double x, Side side) const
{
    if (!(x >= 0.0)) throw ContractViolation("ExpPolyPiecewise::eval: x must be >= 0");
    return pieces_[piece_index(x, side)].eval(x);
}

ExpPolyPiecewise ExpPolyPiecewise::deriv(int order) const
{
    if (order < 0) throw ContractViolation("deriv: negative order");
    ExpPolyPiecewise out = *this;
    for (int k = 0; k < order; ++k) {
        for (auto& p : out.pieces_) p = p.deriv();
    }
    return out;
}

ExpPolyPiecewise::Continuity ExpPolyPiecewise::continuity() const
{
    Continuity c;
    for (std::size_t j = 1; j < breaks_.size(); ++j) {
        double const x = breaks_[j];
        double const l = pieces_[j - 1].eval(x);
        double const r = pieces_[j].eval(x);
        c.value_jump = std::max(c.value_jump, std::abs(l - r) / std::max(1.0, std::abs(l)));
        double const dl = pieces_[j - 1].deriv().eval(x);
        double const dr = pieces_[j].deriv().eval(x);
        c.slope_jump = std::max(c.slope_jump, std::abs(dl - dr));
    }
    return c;
}

ExpPolyPiecewise add(ExpPolyPiecewise const& f, ExpPolyPiecewise const& g)
{
    std::vector<double> bp;
    std::set_union(f.breakpoints().begin(), f.breakpoints().end(), g.breakpoints().begin(),
                   g.breakpoints().end(), std::back_inserter(bp));
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<ExpPolyPiece> pieces;
    pieces.reserve(bp.size());
    for (double b : bp) {
        pieces.push_back(f.pieces()[f.piece_index(b)] + g.pieces()[g.piece_index(b)]);
    }
    return {std::move(bp), std::move(pieces)};
}

ExpPolyPiecewise scale(ExpPolyPiecewise const& f, double c)
{
    std::vector<ExpPolyPiece> pieces;
    for (auto const& p : f.pieces()) pieces.push_back(p.scaled(c));
    return {std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()), std::move(pieces)};
}

ExpPolyPiecewise shift_truncate(ExpPolyPiecewise const& f, double a)
{
    if (!(a > 0.0)) throw ContractViolation("shift_truncate: a must be positive");
    std::vector<double> bp;
    std::vector<ExpPolyPiece> pieces;
    for (std::size_t j = 0; j < f.breakpoints().size() && f.breakpoints()[j] < a; ++j) {
        bp.push_back(f.breakpoints()[j]);
        pieces.push_back(f.pieces()[j]);
    }
    auto const& left = f.pieces()[f.piece_index(a, Side::left)];
    double const value = left.eval(a);
    double const slope = left.deriv().eval(a);
    bp.push_back(a);
    pieces.push_back(ExpPolyPiece::affine(value - slope * a, slope));
    return {std::move(bp), std::move(pieces)};
}

ExpPolyPiecewise convolve_green(ExpPolyPiecewise const& h, double theta1, double theta2, double sigma)
{
    if (!(theta1 > 0.0) || !(theta2 > 0.0) || !(sigma > 0.0)) {
        throw ContractViolation("convolve_green: theta1, theta2, sigma must be positive");
    }
    if (std::abs(h.eval(0.0)) > 1e-9) {
        throw ContractViolation("convolve_green: source must vanish at 0, got h(0) = " +
                                std::to_string(h.eval(0.0)));
    }
    double const prefactor = -2.0 / (sigma * sigma * (theta1 + theta2));
    auto const bp = h.breakpoints();
    auto const pcs = h.pieces();

    // Each term contributes e^{theta1 x} int c u^k e^{s_pos u} du and
    // -e^{-theta2 x} int c u^k e^{s_neg u} du with s_pos = beta - theta1,
    // s_neg = beta + theta2. Near-resonant terms are split at u = 1/|s|.
    std::vector<double> out_bp;
    std::vector<std::size_t> src;  // h piece behind each output piece
    for (std::size_t j = 0; j < pcs.size(); ++j) {
        double const b = bp[j];
        double const e = j + 1 < pcs.size() ? bp[j + 1] : INFINITY;
        std::vector<double> cuts{b};
        for (auto const& t : pcs[j].terms()) {
            for (double sv : {t.rate - theta1, t.rate + theta2}) {
                if (sv == 0.0 || !near_resonant(t.power, sv)) continue;
                double const p = 1.0 / std::abs(sv);
                if (p > b && p < e) cuts.push_back(p);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (double c : cuts) {
            out_bp.push_back(c);
            src.push_back(j);
        }
    }

    // Accumulated integrals over completed segments:
    //   acc_pos = int h(u) e^{-theta1 u} du,  acc_neg = int h(u) e^{theta2 u} du.
    double acc_pos = 0.0;
    double acc_neg = 0.0;
    std::vector<ExpPolyPiece> out;
    out.reserve(out_bp.size());
    for (std::size_t q = 0; q < out_bp.size(); ++q) {
        double const b = out_bp[q];
        double const e = q + 1 < out_bp.size() ? out_bp[q + 1] : INFINITY;
        std::vector<ExpPolyTerm> terms;
        double start_pos = 0.0;  // antiderivative values at the segment start
        double start_neg = 0.0;
        double end_pos = 0.0;
        double end_neg = 0.0;
        for (auto const& t : pcs[src[q]].terms()) {
            for (int side = 0; side < 2; ++side) {
                double const sv = side == 0 ? t.rate - theta1 : t.rate + theta2;
                double const kernel_rate = side == 0 ? theta1 : -theta2;
                double const c = side == 0 ? t.coeff : -t.coeff;
                double& start = side == 0 ? start_pos : start_neg;
                double& finish = side == 0 ? end_pos : end_neg;
                bool const series = sv == 0.0 || (near_resonant(t.power, sv) && std::abs(sv) * e <= 1.0 + 1e-12);
                if (series) {
                    int const m = series_order(sv, e);
                    append_series_antideriv(c, t.power, sv, m, kernel_rate, terms);
                    start += t.coeff * series_antideriv_at(t.power, sv, m, b);
                    if (std::isfinite(e)) finish += t.coeff * series_antideriv_at(t.power, sv, m, e);
                } else {
                    append_power_exp_antideriv(c, t.power, sv, t.rate, terms);
                    start += t.coeff * power_exp_antideriv_at(t.power, sv, b);
                    if (std::isfinite(e)) finish += t.coeff * power_exp_antideriv_at(t.power, sv, e);
                }
            }
        }
        terms.push_back({acc_pos - start_pos, 0, theta1});
        terms.push_back({-(acc_neg - start_neg), 0, -theta2});
        out.push_back(ExpPolyPiece(std::move(terms)).scaled(prefactor));
        acc_pos += end_pos - start_pos;
        acc_neg += end_neg - start_neg;
    }
    return {std::move(out_bp), std::move(out)};
}

std::string to_json(ExpPolyPiecewise const& f)
{
    nlohmann::json doc;
    doc["breakpoints"] = std::vector<double>(f.breakpoints().begin(), f.breakpoints().end());
    auto pieces = nlohmann::json::array();
    for (auto const& p : f.pieces()) {
        auto terms = nlohmann::json::array();
        for (auto const& t : p.terms()) terms.push_back({t.coeff, t.power, t.rate});
        pieces.push_back(terms);
    }
    doc["pieces"] = pieces;
    return doc.dump();
}

ExpPolyPiecewise piecewise_from_json(std::string const& text)
{
    auto const doc = nlohmann::json::parse(text);
    auto bp = doc.at("breakpoints").get<std::vector<double>>();
    std::vector<ExpPolyPiece> pieces;
    for (auto const& p : doc.at("pieces")) {
        std::vector<ExpPolyTerm> terms;
        for (auto const& t : p) terms.push_back({t.at(0).get<double>(), t.at(1).get<int>(), t.at(2).get<double>()});
        pieces.emplace_back(std::move(terms));
    }
    return {std::move(bp), std::move(pieces)};
}

}  // namespace divbar
