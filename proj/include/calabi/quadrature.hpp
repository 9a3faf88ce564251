#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace calabi::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

struct Options {
    double abs_tol = 1e-9;
    std::size_t max_intervals = 4000;
};

/// Globally adaptive Gauss-Kronrod (21-point) integration of f over [a, b]
/// with an absolute error target. Interior breakpoints in `cuts` seed the
/// initial partition. Throws NumericError with the partial estimate when the
/// interval budget is exhausted before the error target is met.
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt,
                 std::span<const double> cuts = {});

/// Integral over [0,1] x [0,1] (outer x, inner y) by nested adaptive quadrature.
Result integrate_2d(const std::function<double(double, double)>& f, const Options& opt,
                    std::span<const double> outer_cuts = {}, std::span<const double> inner_cuts = {});

}  // namespace calabi::quad
