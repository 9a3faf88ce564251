#pragma once

#include "calabi/diskmap.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

using calabi::PiecewisePolynomial;
using calabi::Point;
namespace dm = calabi::diskmap;

/// psi(r) = sum_k c[k] r^k on [0, 1].
inline dm::DiskMap polynomial_twist(std::vector<double> c) {
    return dm::DiskMap::twist(dm::TwistProfile(PiecewisePolynomial({{0.0, 1.0, std::move(c)}})));
}

inline dm::DiskMap quadratic_twist(double s = 0.3) { return polynomial_twist({0.0, 0.0, s}); }

/// Negative twist in the disk of radius 0.3 about (0.5, 0), turning its centre
/// by half a turn clockwise, followed by rotation by pi.
inline dm::DiskMap counterexample_map(int steps = 64) {
    dm::HamiltonianTerm bump;
    bump.kind = dm::HamiltonianTerm::Kind::Bump;
    bump.center = Point(0.5, 0.0);
    bump.radius = 0.3;
    bump.power = 3;
    bump.amplitude = std::numbers::pi * bump.radius * bump.radius / (2.0 * bump.power);
    auto flow = dm::DiskMap::hamiltonian_flow(dm::Hamiltonian({bump}), steps);
    return dm::DiskMap::composition({flow, dm::DiskMap::rotation(0.5)});
}

inline Point random_disk_point(std::mt19937_64& rng, double rmax = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = rmax * std::sqrt(u(rng));
    const double t = 2.0 * std::numbers::pi * u(rng);
    return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace testsupport
