#pragma once

#include <span>
#include <vector>

namespace calabi {

/// Dense polynomial helpers; coefficients are in ascending powers.
namespace poly {

double eval(std::span<const double> c, double x);
std::vector<double> derivative(std::span<const double> c);
std::vector<double> antiderivative(std::span<const double> c);
std::vector<double> multiply(std::span<const double> a, std::span<const double> b);
std::vector<double> add(std::span<const double> a, std::span<const double> b);
std::vector<double> scale(std::span<const double> a, double s);
/// Coefficients of x -> p(x + s).
std::vector<double> taylor_shift(std::span<const double> c, double s);

}  // namespace poly

/// Piecewise polynomial on [lo, hi]. Each piece stores coefficients in the
/// local variable (r - piece.lo), so a piece [0.2, 0.5, 1, 0, 3] is
/// 1 + 3 (r - 0.2)^2 on [0.2, 0.5].
class PiecewisePolynomial {
public:
    struct Piece {
        double lo;
        double hi;
        std::vector<double> coeffs;
    };

    PiecewisePolynomial() = default;
    /// Pieces must be contiguous and ordered. Continuity is not required here.
    explicit PiecewisePolynomial(std::vector<Piece> pieces);

    static PiecewisePolynomial constant(double lo, double hi, double value);

    double lo() const { return pieces_.front().lo; }
    double hi() const { return pieces_.back().hi; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    double value(double r) const;
    double derivative(double r) const;

    /// Exact integral of rho^2 p'(rho) over [a, b] within the domain.
    double r2_weighted_derivative_integral(double a, double b) const;
    /// Exact integral of w(rho) p(rho) over [a, b] with w a polynomial in rho.
    double weighted_integral(std::span<const double> weight, double a, double b) const;

    /// Largest jump in value (resp. derivative) across interior breakpoints.
    double max_value_jump() const;
    double max_derivative_jump() const;

    /// Smallest r with p constant on [r, hi()], or hi() when the last piece is not constant.
    double constant_tail_start(double tol = 0.0) const;

    std::vector<double> breakpoints() const;

    /// Pointwise sum/difference on the common domain; breakpoints are merged.
    friend PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
    friend PiecewisePolynomial operator-(const PiecewisePolynomial& a, const PiecewisePolynomial& b);

    /// Restriction to [a, b] subset of the domain.
    PiecewisePolynomial restricted(double a, double b) const;
    /// Concatenation: this followed by `tail`, which must start at hi().
    PiecewisePolynomial joined(const PiecewisePolynomial& tail) const;

private:
    std::size_t locate(double r) const;
    std::vector<Piece> pieces_;
};

}  // namespace calabi
