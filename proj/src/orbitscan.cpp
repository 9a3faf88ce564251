#include "calabi/orbitscan.hpp"

#include "calabi/errors.hpp"
#include "calabi/report.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace calabi::orbitscan {

namespace dm = calabi::diskmap;
using nlohmann::ordered_json;

namespace {

struct Iterate {
    Point x;
    Mat2 d;
};

Iterate iterate(const dm::DiskMap& map, Point x, int n) {
    Mat2 d = Mat2::Identity();
    for (int i = 0; i < n; ++i) {
        const dm::MapJet j = dm::jet(map, x);
        d = j.jacobian * d;
        x = j.value;
    }
    return {x, d};
}

Point power(const dm::DiskMap& map, Point x, int n) {
    for (int i = 0; i < n; ++i) x = dm::eval_map(map, x);
    return x;
}

bool inside(const Point& x) { return x.norm() <= 1.0; }

enum class Outcome { Converged, Singular, Escaped, NotConverged };

struct NewtonResult {
    Outcome outcome = Outcome::NotConverged;
    Point x = Point::Zero();
};

/// Damped Newton on phi^d(x) - x with a truncated-SVD pseudo-inverse, so
/// that roots lying on curves (twist circles) and degenerate roots are
/// still reached. Iteration continues past the tolerance until the step
/// stalls, to polish slowly converging degenerate roots.
NewtonResult newton(const dm::DiskMap& map, Point x, int d, const ScanOptions& opt) {
    Iterate it = iterate(map, x, d);
    double res = (it.x - x).norm();
    if (res <= opt.newton_tol) return {Outcome::Converged, x};

    for (int k = 0; k < opt.max_newton_iter; ++k) {
        const Mat2 jac = it.d - Mat2::Identity();
        Eigen::JacobiSVD<Mat2> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto s = svd.singularValues();
        if (!(s(0) > 0.0)) return {res <= opt.newton_tol ? Outcome::Converged : Outcome::Singular, x};
        Eigen::Vector2d inv = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i)
            if (s(i) > 1e-12 * s(0)) inv(i) = 1.0 / s(i);
        const Point step = -(svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * (it.x - x));

        double lam = 1.0;
        bool accepted = false, ever_inside = false;
        Point xn;
        Iterate itn;
        double resn = res;
        for (int h = 0; h <= 40; ++h, lam *= 0.5) {
            xn = x + lam * step;
            if (!inside(xn)) continue;
            ever_inside = true;
            itn = iterate(map, xn, d);
            resn = (itn.x - xn).norm();
            if (resn < res) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (res <= opt.newton_tol) return {Outcome::Converged, x};
            return {ever_inside ? Outcome::NotConverged : Outcome::Escaped, x};
        }
        const double moved = (xn - x).norm();
        x = xn;
        it = itn;
        res = resn;
        if (res <= opt.newton_tol && (res == 0.0 || moved <= 1e-15 * (1.0 + x.norm()))) break;
    }
    return {res <= opt.newton_tol ? Outcome::Converged : Outcome::NotConverged, x};
}

std::vector<int> proper_divisors(int d) {
    std::vector<int> out;
    for (int k = 1; k < d; ++k)
        if (d % k == 0) out.push_back(k);
    return out;
}

bool theta_rational(double theta, int q_max) {
    for (int q = 1; q <= q_max; ++q)
        if (std::abs(q * theta - std::round(q * theta)) <= 1e-12) return true;
    return false;
}

std::vector<Point> seed_grid(int n) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = -1.0 + (2.0 * i + 1.0) / n;
            const double v = -1.0 + (2.0 * j + 1.0) / n;
            // Square-to-disk map that keeps cell centres evenly spread.
            out.emplace_back(u * std::sqrt(1.0 - 0.5 * v * v), v * std::sqrt(1.0 - 0.5 * u * u));
        }
    return out;
}

template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1, n ? n : 1);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Rotate the cycle so that the lexicographically smallest point comes first.
void canonicalise(PeriodicOrbit& o) {
    auto less = [](const Point& a, const Point& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); };
    const auto it = std::min_element(o.points.begin(), o.points.end(), less);
    std::rotate(o.points.begin(), it, o.points.end());
}

double orbit_residual(const dm::DiskMap& map, const std::vector<Point>& pts) {
    double r = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        r = std::max(r, (dm::eval_map(map, pts[i]) - pts[(i + 1) % pts.size()]).norm());
    return r;
}

bool distinct_points(const std::vector<Point>& pts, double eps) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if ((pts[i] - pts[j]).norm() <= eps) return false;
    return true;
}

bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, double eps) {
    if (a.period != b.period) return false;
    for (const auto& p : a.points) {
        const bool hit = std::any_of(b.points.begin(), b.points.end(), [&](const Point& q) { return (p - q).norm() <= eps; });
        if (!hit) return false;
    }
    return true;
}

struct SeedOutcome {
    Outcome outcome = Outcome::NotConverged;
    bool reduced = false;
    std::optional<PeriodicOrbit> orbit;
};

SeedOutcome solve_seed(const dm::DiskMap& map, const Point& seed, int d, const ScanOptions& opt) {
    SeedOutcome out;
    NewtonResult nr = newton(map, seed, d, opt);
    out.outcome = nr.outcome;
    if (nr.outcome != Outcome::Converged) return out;

    int period = d;
    for (int dp : proper_divisors(d)) {
        if ((power(map, nr.x, dp) - nr.x).norm() <= opt.newton_tol) {
            const NewtonResult again = newton(map, nr.x, dp, opt);
            if (again.outcome != Outcome::Converged) {
                out.outcome = again.outcome;
                return out;
            }
            nr = again;
            period = dp;
            out.reduced = true;
            break;
        }
    }
    PeriodicOrbit o = orbit_from_point(map, nr.x, period);
    if (!distinct_points(o.points, opt.dedupe_eps) || o.residual > opt.newton_tol) {
        out.outcome = Outcome::NotConverged;
        return out;
    }
    canonicalise(o);
    out.orbit = std::move(o);
    return out;
}

}  // namespace

PeriodicOrbit orbit_from_point(const dm::DiskMap& map, const Point& x, int period) {
    if (period < 1) throw PreconditionError("period must be >= 1");
    PeriodicOrbit o;
    o.period = period;
    o.points.reserve(period);
    Point p = x;
    for (int i = 0; i < period; ++i) {
        o.points.push_back(p);
        if (i + 1 < period) p = dm::eval_map(map, p);
    }
    o.residual = orbit_residual(map, o.points);
    return o;
}

double total_action(const PeriodicOrbit& orbit, const dm::ActionProfile& f) {
    double s = 0.0;
    for (const auto& p : orbit.points) s += f(p);
    return s;
}

ScanResult scan(const dm::ActionProfile& f, const ScanOptions& opt) {
    if (opt.d_max < 1) throw PreconditionError("d_max must be >= 1");
    if (opt.grid_n < 2) throw PreconditionError("grid_n must be >= 2");
    if (!(opt.newton_tol > 0.0) || !(opt.dedupe_eps > 0.0))
        throw PreconditionError("newton_tol and dedupe_eps must be positive");
    const dm::DiskMap& map = f.map();
    ScanResult result;

    std::vector<Point> seeds;
    const double delta = map.collar_radius();
    const bool skip_collar = delta > 0.0 && !theta_rational(map.boundary_angle(), opt.d_max);
    for (const auto& s : seed_grid(opt.grid_n)) {
        if (skip_collar && s.norm() > 1.0 - delta) {
            ++result.diagnostics.collar_seeds_skipped;
            continue;
        }
        seeds.push_back(s);
    }
    // The collar then holds no orbit; the centre still might.
    if (result.diagnostics.collar_seeds_skipped > 0) seeds.emplace_back(0.0, 0.0);

    const std::size_t per_d = seeds.size();
    const std::size_t tasks = per_d * static_cast<std::size_t>(opt.d_max);
    std::vector<SeedOutcome> outcomes(tasks);
    parallel_for(tasks, opt.workers, [&](std::size_t i) {
        const int d = static_cast<int>(i / per_d) + 1;
        outcomes[i] = solve_seed(map, seeds[i % per_d], d, opt);
    });

    // Deterministic merge in (period, seed) order.
    auto& dg = result.diagnostics;
    dg.seeds = tasks;
    std::vector<PeriodicOrbit> unique;
    std::map<int, std::multimap<double, std::size_t>> index;
    for (auto& oc : outcomes) {
        switch (oc.outcome) {
            case Outcome::Converged: ++dg.converged; break;
            case Outcome::Singular: ++dg.singular; break;
            case Outcome::Escaped: ++dg.escaped; break;
            case Outcome::NotConverged: ++dg.not_converged; break;
        }
        if (oc.reduced) ++dg.reduced_period;
        if (!oc.orbit) continue;
        PeriodicOrbit& o = *oc.orbit;
        const double key = o.points.front().x();
        auto& bucket = index[o.period];
        bool dup = false;
        for (auto it = bucket.lower_bound(key - opt.dedupe_eps); it != bucket.end() && it->first <= key + opt.dedupe_eps; ++it)
            if (same_orbit(o, unique[it->second], opt.dedupe_eps)) {
                dup = true;
                break;
            }
        if (dup) {
            ++dg.duplicates;
            continue;
        }
        bucket.emplace(key, unique.size());
        unique.push_back(std::move(o));
    }

    parallel_for(unique.size(), opt.workers, [&](std::size_t i) {
        unique[i].total_action = total_action(unique[i], f);
        unique[i].mean_action = unique[i].total_action / unique[i].period;
    });
    std::stable_sort(unique.begin(), unique.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.mean_action != b.mean_action) return a.mean_action < b.mean_action;
        if (a.period != b.period) return a.period < b.period;
        const Point &p = a.points.front(), &q = b.points.front();
        return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    result.orbits = std::move(unique);
    return result;
}

std::vector<PeriodicOrbit> find_periodic_orbits(const dm::DiskMap& map, int d_max, int grid_n, double newton_tol,
                                                double dedupe_eps) {
    ScanOptions opt;
    opt.d_max = d_max;
    opt.grid_n = grid_n;
    opt.newton_tol = newton_tol;
    opt.dedupe_eps = dedupe_eps;
    return scan(dm::ActionProfile(map, map.boundary_angle()), opt).orbits;
}

TheoremVerdict check_main_theorem(const dm::DiskMap& map, double theta0, const ScanOptions& opt, double tol,
                                  double quad_tol) {
    TheoremVerdict v;
    const auto c = dm::calabi(map, theta0, quad_tol);
    v.calabi = c.value;
    v.calabi_error = c.quad_error_estimate;
    v.theta0 = theta0;
    v.hypothesis_holds = c.value < theta0;
    v.searched_period = opt.d_max;
    v.tol = tol;
    const ScanResult sr = scan(dm::ActionProfile(map, theta0, quad_tol), opt);
    v.diagnostics = sr.diagnostics;
    v.orbit_count = sr.orbits.size();
    if (sr.orbits.empty()) {
        v.inconclusive = true;
        v.min_mean_action = std::numeric_limits<double>::quiet_NaN();
        v.margin = std::numeric_limits<double>::quiet_NaN();
        return v;
    }
    v.witness = sr.orbits.front();
    v.min_mean_action = v.witness->mean_action;
    v.margin = v.calabi - v.min_mean_action;
    v.conclusion_holds = v.min_mean_action <= v.calabi + tol;
    return v;
}

TheoremVerdict check_main_theorem(const dm::DiskMap& map, double theta0, int d_max, double tol) {
    ScanOptions opt;
    opt.d_max = d_max;
    return check_main_theorem(map, theta0, opt, tol);
}

std::string orbits_csv(const std::vector<PeriodicOrbit>& orbits) {
    std::ostringstream os;
    os << "period,points,total_action,mean_action,residual\n";
    for (const auto& o : orbits) {
        os << o.period << ',';
        for (std::size_t i = 0; i < o.points.size(); ++i)
            os << (i ? ";" : "") << fmt15(o.points[i].x()) << ' ' << fmt15(o.points[i].y());
        os << ',' << fmt15(o.total_action) << ',' << fmt15(o.mean_action) << ',' << fmt15(o.residual) << '\n';
    }
    return os.str();
}

namespace {
ordered_json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round15(x);
}
}  // namespace

ordered_json orbit_json(const PeriodicOrbit& o) {
    ordered_json j;
    j["period"] = o.period;
    ordered_json pts = ordered_json::array();
    for (const auto& p : o.points) pts.push_back({num(p.x()), num(p.y())});
    j["points"] = pts;
    j["total_action"] = num(o.total_action);
    j["mean_action"] = num(o.mean_action);
    j["residual"] = num(o.residual);
    return j;
}

ordered_json verdict_json(const TheoremVerdict& v) {
    ordered_json j;
    j["calabi"] = num(v.calabi);
    j["calabi_error"] = num(v.calabi_error);
    j["theta0"] = num(v.theta0);
    j["hypothesis_holds"] = v.hypothesis_holds;
    j["min_mean_action"] = num(v.min_mean_action);
    j["margin"] = num(v.margin);
    j["tol"] = num(v.tol);
    j["conclusion_holds"] = v.conclusion_holds;
    j["inconclusive"] = v.inconclusive;
    j["searched_period"] = v.searched_period;
    j["orbit_count"] = v.orbit_count;
    j["witness"] = v.witness ? orbit_json(*v.witness) : ordered_json(nullptr);
    const auto& d = v.diagnostics;
    j["diagnostics"] = {{"seeds", d.seeds},
                        {"converged", d.converged},
                        {"singular", d.singular},
                        {"escaped", d.escaped},
                        {"not_converged", d.not_converged},
                        {"reduced_period", d.reduced_period},
                        {"duplicates", d.duplicates},
                        {"collar_seeds_skipped", d.collar_seeds_skipped}};
    return j;
}

}  // namespace calabi::orbitscan
