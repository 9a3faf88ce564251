#include "calabi/polynomial.hpp"

#include "calabi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace calabi {

namespace poly {

double eval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> derivative(std::span<const double> c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

std::vector<double> antiderivative(std::span<const double> c) {
    std::vector<double> a(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) a[i + 1] = c[i] / static_cast<double>(i + 1);
    return a;
}

std::vector<double> multiply(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {0.0};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

std::vector<double> scale(std::span<const double> a, double s) {
    std::vector<double> out(a.begin(), a.end());
    for (auto& v : out) v *= s;
    return out;
}

std::vector<double> taylor_shift(std::span<const double> c, double s) {
    // Repeated synthetic division (Horner shift).
    std::vector<double> out(c.begin(), c.end());
    const std::size_t n = out.size();
    for (std::size_t k = 0; k + 1 < n; ++k)
        for (std::size_t j = n - 1; j > k; --j) out[j - 1] += s * out[j];
    return out;
}

}  // namespace poly

PiecewisePolynomial::PiecewisePolynomial(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw PreconditionError("piecewise polynomial needs at least one piece");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (!(p.hi > p.lo)) throw PreconditionError("piece " + std::to_string(i) + " has hi <= lo");
        if (p.coeffs.empty()) throw PreconditionError("piece " + std::to_string(i) + " has no coefficients");
        if (i > 0 && std::abs(p.lo - pieces_[i - 1].hi) > 1e-12)
            throw PreconditionError("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                    " are not contiguous");
    }
}

PiecewisePolynomial PiecewisePolynomial::constant(double lo, double hi, double value) {
    return PiecewisePolynomial({Piece{lo, hi, {value}}});
}

std::size_t PiecewisePolynomial::locate(double r) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double x, const Piece& p) { return x < p.lo; });
    if (it == pieces_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
}

double PiecewisePolynomial::value(double r) const {
    const auto& p = pieces_[locate(r)];
    return poly::eval(p.coeffs, r - p.lo);
}

double PiecewisePolynomial::derivative(double r) const {
    const auto& p = pieces_[locate(r)];
    return poly::eval(poly::derivative(p.coeffs), r - p.lo);
}

double PiecewisePolynomial::r2_weighted_derivative_integral(double a, double b) const {
    const double w[] = {0.0, 0.0, 1.0};
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
        if (hi <= lo) continue;
        // rho = p.lo + x; rho^2 in local variable.
        const auto local_w = poly::taylor_shift(w, p.lo);
        const auto integrand = poly::multiply(local_w, poly::derivative(p.coeffs));
        const auto prim = poly::antiderivative(integrand);
        total += poly::eval(prim, hi - p.lo) - poly::eval(prim, lo - p.lo);
    }
    return sign * total;
}

double PiecewisePolynomial::weighted_integral(std::span<const double> weight, double a, double b) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
        if (hi <= lo) continue;
        const auto local_w = poly::taylor_shift(weight, p.lo);
        const auto prim = poly::antiderivative(poly::multiply(local_w, p.coeffs));
        total += poly::eval(prim, hi - p.lo) - poly::eval(prim, lo - p.lo);
    }
    return total;
}

double PiecewisePolynomial::max_value_jump() const {
    double jump = 0.0;
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
        const auto& l = pieces_[i - 1];
        const auto& r = pieces_[i];
        jump = std::max(jump, std::abs(poly::eval(l.coeffs, l.hi - l.lo) - r.coeffs[0]));
    }
    return jump;
}

double PiecewisePolynomial::max_derivative_jump() const {
    double jump = 0.0;
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
        const auto& l = pieces_[i - 1];
        const auto& r = pieces_[i];
        const double dl = poly::eval(poly::derivative(l.coeffs), l.hi - l.lo);
        const double dr = r.coeffs.size() > 1 ? r.coeffs[1] : 0.0;
        jump = std::max(jump, std::abs(dl - dr));
    }
    return jump;
}

double PiecewisePolynomial::constant_tail_start(double tol) const {
    auto is_constant = [tol](const Piece& p) {
        for (std::size_t i = 1; i < p.coeffs.size(); ++i)
            if (std::abs(p.coeffs[i]) > tol) return false;
        return true;
    };
    if (!is_constant(pieces_.back())) return hi();
    const double v = pieces_.back().coeffs[0];
    double start = pieces_.back().lo;
    for (std::size_t i = pieces_.size() - 1; i-- > 0;) {
        if (!is_constant(pieces_[i]) || std::abs(pieces_[i].coeffs[0] - v) > tol) break;
        start = pieces_[i].lo;
    }
    return start;
}

std::vector<double> PiecewisePolynomial::breakpoints() const {
    std::vector<double> out;
    out.reserve(pieces_.size() + 1);
    for (const auto& p : pieces_) out.push_back(p.lo);
    out.push_back(hi());
    return out;
}

namespace {

PiecewisePolynomial combine(const PiecewisePolynomial& a, const PiecewisePolynomial& b, double sign) {
    if (std::abs(a.lo() - b.lo()) > 1e-12 || std::abs(a.hi() - b.hi()) > 1e-12)
        throw PreconditionError("piecewise polynomials have different domains");
    auto cuts = a.breakpoints();
    const auto bcuts = b.breakpoints();
    cuts.insert(cuts.end(), bcuts.begin(), bcuts.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::abs(x - y) <= 1e-14; }),
               cuts.end());
    auto local = [](const PiecewisePolynomial& p, double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        for (const auto& pc : p.pieces())
            if (mid >= pc.lo && mid <= pc.hi) return poly::taylor_shift(pc.coeffs, lo - pc.lo);
        return std::vector<double>{0.0};
    };
    std::vector<PiecewisePolynomial::Piece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        out.push_back({lo, hi, poly::add(local(a, lo, hi), poly::scale(local(b, lo, hi), sign))});
    }
    return PiecewisePolynomial(std::move(out));
}

}  // namespace

PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    return combine(a, b, 1.0);
}

PiecewisePolynomial operator-(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    return combine(a, b, -1.0);
}

PiecewisePolynomial PiecewisePolynomial::restricted(double a, double b) const {
    if (a < lo() - 1e-12 || b > hi() + 1e-12 || !(b > a))
        throw PreconditionError("restriction interval outside the domain");
    std::vector<Piece> out;
    for (const auto& p : pieces_) {
        const double l = std::max(a, p.lo), h = std::min(b, p.hi);
        if (h - l <= 1e-15) continue;
        out.push_back({l, h, poly::taylor_shift(p.coeffs, l - p.lo)});
    }
    return PiecewisePolynomial(std::move(out));
}

PiecewisePolynomial PiecewisePolynomial::joined(const PiecewisePolynomial& tail) const {
    if (std::abs(tail.lo() - hi()) > 1e-12) throw PreconditionError("joined pieces are not contiguous");
    auto out = pieces_;
    out.insert(out.end(), tail.pieces_.begin(), tail.pieces_.end());
    out.back().hi = tail.hi();
    return PiecewisePolynomial(std::move(out));
}

}  // namespace calabi
