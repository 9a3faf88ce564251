#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace calabi {

using Point = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Point polar_point(double r, double theta) {
    return {r * std::cos(theta), r * std::sin(theta)};
}

inline Mat2 rotation_matrix(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat2 m;
    m << c, -s, s, c;
    return m;
}

/// z-component of u x v.
inline double cross(const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Radical inverse of i in the given base (van der Corput).
inline double radical_inverse(std::size_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, value = 0.0;
    while (i > 0) {
        value += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return value;
}

/// Area-uniform quasi-random points in the closed unit disk (Halton bases 2 and 3).
inline std::vector<Point> halton_disk(std::size_t n, std::size_t skip = 1) {
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = radical_inverse(i + skip, 2);
        const double v = radical_inverse(i + skip, 3);
        out.push_back(polar_point(std::sqrt(u), kTwoPi * v));
    }
    return out;
}

}  // namespace calabi
