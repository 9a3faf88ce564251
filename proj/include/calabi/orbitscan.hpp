#pragma once

// Periodic orbits of disk maps, their actions, and the mean-action test
// against the Calabi invariant.

#include "calabi/diskmap.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace calabi::orbitscan {

struct PeriodicOrbit {
    std::vector<Point> points;  ///< x_1, phi(x_1), ..., phi^{d-1}(x_1)
    int period = 0;
    double total_action = 0.0;
    double mean_action = 0.0;
    /// max_i |phi(x_i) - x_{i+1 mod d}|
    double residual = 0.0;
};

struct ScanOptions {
    int d_max = 1;
    int grid_n = 16;
    double newton_tol = 1e-10;
    double dedupe_eps = 1e-7;
    int max_newton_iter = 100;
    int workers = 1;
};

struct ScanDiagnostics {
    std::size_t seeds = 0;            ///< (seed, period) pairs attempted
    std::size_t converged = 0;
    std::size_t singular = 0;         ///< Newton Jacobian vanished away from a root
    std::size_t escaped = 0;          ///< iterate could not be kept inside the disk
    std::size_t not_converged = 0;
    std::size_t reduced_period = 0;   ///< solutions reassigned to a proper divisor
    std::size_t duplicates = 0;
    std::size_t collar_seeds_skipped = 0;
};

struct ScanResult {
    std::vector<PeriodicOrbit> orbits;  ///< sorted by mean action
    ScanDiagnostics diagnostics;
};

/// Newton scan of phi^d(x) = x for d = 1..d_max from a grid_n x grid_n seed
/// grid, with actions taken from `f`. Orbits are reported at their minimal
/// period only and deduplicated up to cyclic order.
ScanResult scan(const diskmap::ActionProfile& f, const ScanOptions& opt);

/// Same scan with theta0 = the map's boundary angle.
std::vector<PeriodicOrbit> find_periodic_orbits(const diskmap::DiskMap& map, int d_max, int grid_n,
                                                double newton_tol = 1e-10, double dedupe_eps = 1e-7);

/// sum_i f(x_i)
double total_action(const PeriodicOrbit& orbit, const diskmap::ActionProfile& f);

/// x_1, ..., x_d from x_1 by iterating the map.
PeriodicOrbit orbit_from_point(const diskmap::DiskMap& map, const Point& x, int period);

struct TheoremVerdict {
    double calabi = 0.0;
    double calabi_error = 0.0;
    double theta0 = 0.0;
    bool hypothesis_holds = false;      ///< calabi < theta0
    double min_mean_action = 0.0;
    std::optional<PeriodicOrbit> witness;
    double margin = 0.0;                ///< calabi - min_mean_action
    int searched_period = 0;
    double tol = 0.0;
    bool conclusion_holds = false;      ///< min_mean_action <= calabi + tol
    bool inconclusive = false;          ///< no orbit found up to searched_period
    std::size_t orbit_count = 0;
    ScanDiagnostics diagnostics;
};

TheoremVerdict check_main_theorem(const diskmap::DiskMap& map, double theta0, const ScanOptions& opt, double tol,
                                  double quad_tol = diskmap::kDefaultQuadTol);
TheoremVerdict check_main_theorem(const diskmap::DiskMap& map, double theta0, int d_max, double tol);

/// period,points,total_action,mean_action,residual with points as "x y;x y".
std::string orbits_csv(const std::vector<PeriodicOrbit>& orbits);
nlohmann::ordered_json orbit_json(const PeriodicOrbit& orbit);
nlohmann::ordered_json verdict_json(const TheoremVerdict& v);

}  // namespace calabi::orbitscan
