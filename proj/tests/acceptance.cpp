// Acceptance run: one PASS/FAIL line per criterion with its runtime. Every
// tolerance and time budget is fixed below. Exit status is the number of
// failed criteria.

#include "calabi/diskmap.hpp"
#include "calabi/echcomb.hpp"
#include "calabi/errors.hpp"
#include "calabi/orbitscan.hpp"
#include "calabi/report.hpp"
#include "calabi/suspension.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace calabi;
namespace dm = calabi::diskmap;
namespace ec = calabi::echcomb;
namespace os = calabi::orbitscan;
namespace su = calabi::suspension;
using testsupport::counterexample_map;
using testsupport::polynomial_twist;
using testsupport::quadratic_twist;
using testsupport::random_disk_point;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Records the first failing check and a running detail line.
class Checks {
public:
    void require(bool ok, const std::string& what) {
        if (!ok && pass_) {
            pass_ = false;
            failure_ = what;
        }
    }
    void note(const std::string& s) { notes_ << (notes_.tellp() > 0 ? "; " : "") << s; }
    Outcome outcome() const { return {pass_, pass_ ? notes_.str() : "failed: " + failure_ + " | " + notes_.str()}; }

private:
    bool pass_ = true;
    std::string failure_;
    std::ostringstream notes_;
};

template <class F>
double gauss(F f, double a, double b, int panels = 32) {
    double s = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i)
        s += boost::math::quadrature::gauss<double, 20>::integrate(f, a + i * h, a + (i + 1) * h);
    return s;
}

/// Calabi invariant of the twist by psi with boundary angle psi(1): int_0^1 4 r^3 psi(r) dr.
template <class Psi>
double twist_calabi_oracle(Psi psi) {
    return gauss([&](double r) { return 4.0 * r * r * r * psi(r); }, 0.0, 1.0);
}

/// All values a m + b n with (m, n) in N^2 below L, sorted.
std::vector<double> enumerate_sorted(double a, double b, double L) {
    std::vector<double> v;
    for (long m = 0; a * static_cast<double>(m) <= L; ++m)
        for (long n = 0; a * static_cast<double>(m) + b * static_cast<double>(n) <= L; ++n)
            v.push_back(a * static_cast<double>(m) + b * static_cast<double>(n));
    std::sort(v.begin(), v.end());
    return v;
}

/// First k_max + 1 terms of N_k(a, b) by enumeration over a triangle large enough to contain them.
std::vector<double> brute_nk(double a, double b, std::size_t k_max) {
    const double L = std::sqrt(2.0 * a * b * static_cast<double>(k_max + 1)) + a + b;
    auto v = enumerate_sorted(a, b, L);
    v.resize(k_max + 1);
    return v;
}

// ---------------------------------------------------------------- criteria

Outcome rotation_calabi() {
    Checks c;
    for (double t : {0.3, 0.7, 1.25}) {
        const double v = dm::calabi(dm::DiskMap::rotation(t), t).value;
        c.require(std::abs(v - t) <= 1e-9, "rotation " + fmt15(t) + " gives " + fmt15(v));
        c.note("theta0=" + fmt15(t) + " err=" + fmt15(std::abs(v - t)));
    }
    return c.outcome();
}

Outcome twist_calabi() {
    Checks c;
    const double oracle = twist_calabi_oracle([](double r) { return 0.3 * r * r; });
    const auto map = quadratic_twist();
    const double polar = dm::calabi(map, 0.3, 1e-10, dm::CalabiMethod::PolarClosedForm).value;
    const double adapt = dm::calabi(map, 0.3, 1e-10, dm::CalabiMethod::Adaptive2d).value;
    c.require(std::abs(oracle - 0.2) <= 1e-12, "oracle " + fmt15(oracle));
    c.require(std::abs(polar - oracle) <= 1e-8, "polar " + fmt15(polar));
    c.require(std::abs(adapt - oracle) <= 1e-8, "adaptive " + fmt15(adapt));
    c.require(std::abs(adapt - polar) <= 1e-8, "methods disagree");
    c.note("oracle=" + fmt15(oracle) + " polar=" + fmt15(polar) + " adaptive=" + fmt15(adapt));
    return c.outcome();
}

Outcome homomorphism() {
    Checks c;
    std::mt19937_64 rng(20231);
    std::uniform_real_distribution<double> coef(-0.3, 0.3);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> p1{coef(rng), 0.0, coef(rng), 0.0, coef(rng)};
        std::vector<double> p2{coef(rng), 0.0, coef(rng), 0.0, coef(rng)};
        const auto f1 = polynomial_twist(p1), f2 = polynomial_twist(p2);
        const double t1 = f1.boundary_angle(), t2 = f2.boundary_angle();
        const auto comp = dm::DiskMap::composition({f1, f2});
        const double lhs = dm::calabi(comp, t1 + t2, 1e-10, dm::CalabiMethod::Adaptive2d).value;
        const double rhs = dm::calabi(f1, t1, 1e-10).value + dm::calabi(f2, t2, 1e-10).value;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    c.require(worst < 1e-7, "defect " + fmt15(worst));
    c.note("max |V(f1 f2) - V(f1) - V(f2)| = " + fmt15(worst) + " over 20 pairs");
    return c.outcome();
}

Outcome theorem_harness() {
    Checks c;
    os::ScanOptions opt;
    opt.d_max = 12;
    const auto v = os::check_main_theorem(quadratic_twist(), 0.3, opt, 1e-6);
    c.require(v.hypothesis_holds && std::abs(v.calabi - 0.2) <= 1e-9, "twist hypothesis");
    c.require(v.min_mean_action <= 0.2 + 1e-6, "twist min mean action " + fmt15(v.min_mean_action));
    c.require(v.witness.has_value(), "no witness");
    if (v.witness) {
        const auto& w = *v.witness;
        // The witness circle turns by p/q with q = period <= 12.
        const double r = w.points.front().norm();
        const double turns = 0.3 * r * r * w.period;
        c.require(w.period <= 12 && std::abs(turns - std::round(turns)) <= 1e-6, "witness not on a rational circle");
        c.require(r <= 0.5, "witness radius " + fmt15(r));
        c.note("twist: calabi=" + fmt15(v.calabi) + " min_mean=" + fmt15(v.min_mean_action) +
               " witness period=" + std::to_string(w.period) + " r=" + fmt15(r));
    }

    const auto ce = counterexample_map();
    os::ScanOptions o2;
    o2.d_max = 2;
    const auto cv = os::check_main_theorem(ce, 0.5, o2, 1e-4);
    const dm::ActionProfile f(ce, 0.5);
    const auto sr = os::scan(f, o2);
    int fixed = 0;
    double best_two = std::numeric_limits<double>::infinity();
    for (const auto& o : sr.orbits) {
        if (o.period == 1) {
            ++fixed;
            c.require(std::abs(o.total_action - 0.5) <= 1e-9 && o.total_action > cv.calabi, "fixed point action");
        } else if (o.period == 2) {
            best_two = std::min(best_two, o.mean_action);
        }
    }
    c.require(cv.hypothesis_holds, "counterexample hypothesis");
    c.require(fixed == 1, std::to_string(fixed) + " fixed points");
    c.require(best_two <= cv.calabi + 1e-4, "period-two mean action " + fmt15(best_two));
    c.note("counterexample: calabi=" + fmt15(cv.calabi) + " fixed action=0.5 best period-2 mean=" + fmt15(best_two));
    return c.outcome();
}

Outcome nk_oracle() {
    Checks c;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.3, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double a = u(rng), b = u(rng);
        const auto seq = ec::nk_sequence(a, b, 2000);
        const auto brute = brute_nk(a, b, 2000);
        for (std::size_t k = 0; k <= 2000; ++k) {
            const double rel = std::abs(seq[k].value - brute[k]) / std::max(1.0, brute[k]);
            worst = std::max(worst, rel);
        }
    }
    c.require(worst <= 1e-12, "relative difference " + fmt15(worst));
    c.note("25 pairs, k <= 2000, max relative difference " + fmt15(worst));
    return c.outcome();
}

Outcome lattice_identity() {
    Checks c;
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    std::uniform_int_distribution<int> mn(0, 40);
    int mismatches = 0;
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        const std::int64_t m = mn(rng), n = mn(rng);
        const double L = a * static_cast<double>(m) + b * static_cast<double>(n);
        std::int64_t count = 0;
        for (std::int64_t p = 0; a * static_cast<double>(p) <= L * (1 + 1e-12); ++p)
            for (std::int64_t q = 0; a * static_cast<double>(p) + b * static_cast<double>(q) <= L * (1 + 1e-12); ++q)
                ++count;
        if (ec::lattice_count_identity(a, b, m, n) != count) ++mismatches;
    }
    c.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
    c.note("100 instances, " + std::to_string(mismatches) + " mismatches");
    return c.outcome();
}

Outcome comb_scan() {
    Checks c;
    const std::size_t K = 100000;
    const auto rep = ec::nk_lower_bound(1.0, kSqrt2, K);
    c.require(rep.pass && std::isfinite(rep.c_witness), "scan did not pass");
    const auto brute = brute_nk(1.0, kSqrt2, K);
    std::size_t violations = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        const double kd = static_cast<double>(k);
        if (brute[k] * brute[k] < 2.0 * kSqrt2 * kd - rep.c_witness * std::sqrt(kd) - 1e-9 * kd) ++violations;
    }
    c.require(violations == 0, std::to_string(violations) + " violations");
    c.note("c_witness=" + fmt15(rep.c_witness) + " at k=" + std::to_string(rep.worst_k) + ", checked against enumeration");
    return c.outcome();
}

Outcome ellipsoid_bijection() {
    Checks c;
    const double a = 1.0, b = kSqrt2, L = 50.0;
    std::vector<std::pair<double, std::int64_t>> by_grading;
    std::set<std::int64_t> seen;
    const auto all = enumerate_sorted(a, b, L);
    for (std::int64_t m = 0; static_cast<double>(m) <= L; ++m)
        for (std::int64_t n = 0; static_cast<double>(m) + b * static_cast<double>(n) <= L; ++n) {
            const double act = static_cast<double>(m) + b * static_cast<double>(n);
            const auto g = ec::grading_ellipsoid({m, n, a, b});
            // Twice the number of generators with smaller action.
            const auto below = std::lower_bound(all.begin(), all.end(), act - 1e-9) - all.begin();
            c.require(g == 2 * below, "grading of (" + std::to_string(m) + "," + std::to_string(n) + ")");
            c.require(g % 2 == 0 && seen.insert(g).second, "grading not even or repeated");
            by_grading.push_back({act, g});
        }
    const auto count = static_cast<std::int64_t>(seen.size());
    c.require(!seen.empty() && *seen.begin() == 0 && *seen.rbegin() == 2 * (count - 1), "not an initial segment");
    const auto seq = ec::nk_sequence(a, b, static_cast<std::size_t>(count - 1));
    for (const auto& [act, g] : by_grading)
        c.require(act == seq[static_cast<std::size_t>(g / 2)].value, "action differs from N_k at grading " + std::to_string(g));
    c.note(std::to_string(count) + " generators, gradings 0.." + std::to_string(2 * (count - 1)));
    return c.outcome();
}

Outcome volume_asymptotics() {
    Checks c;
    const std::vector<std::size_t> ks{1, 10, 100, 1000, 10000, 100000};
    const auto rep = ec::volume_asymptotic_check(1.0, kSqrt2, ks);
    c.require(rep.pass, "report did not pass");
    const auto brute = brute_nk(1.0, kSqrt2, ks.back());
    double cw = 0.0;
    for (std::size_t k = 1; k < brute.size(); ++k) {
        const double kd = static_cast<double>(k);
        cw = std::max(cw, (2.0 * kSqrt2 * kd - brute[k] * brute[k]) / std::sqrt(kd));
    }
    c.require(std::abs(cw - rep.c_witness) <= 1e-9 * cw, "c_witness " + fmt15(rep.c_witness) + " vs " + fmt15(cw));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double kd = static_cast<double>(ks[i]);
        const double ratio = brute[ks[i]] * brute[ks[i]] / (2.0 * kd);
        c.require(std::abs(ratio - rep.ratios[i]) <= 1e-12 * ratio, "ratio at k=" + std::to_string(ks[i]));
        const double bound = cw * std::sqrt(kd) / (2.0 * kd) + 1e-12 * kSqrt2;
        c.require(std::abs(ratio - kSqrt2) <= bound, "bound at k=" + std::to_string(ks[i]));
    }
    const double last = rep.ratios.back();
    c.require(std::abs(last - kSqrt2) <= 0.01 * kSqrt2, "ratio at 1e5 = " + fmt15(last));
    c.note("ratio(1e5)=" + fmt15(last) + " defect=" + fmt15(std::abs(last - kSqrt2)) + " bound=" + fmt15(rep.bound));
    return c.outcome();
}

Outcome knot_filtration() {
    Checks c;
    for (double a : {1.0, 0.8, 2.3}) {
        const double b = a * kSqrt2;
        for (std::int64_t d = 0; d <= 50; ++d)
            for (std::int64_t m = 0; m <= 50; ++m) {
                const double F = ec::ellipsoid_filtration(a, b, d, m);
                const double A = (a * static_cast<double>(d) + b * static_cast<double>(m)) / a;
                // Exact for a = 1; otherwise the two sides differ only by rounding.
                const double tol = a == 1.0 ? 0.0 : 4 * std::numeric_limits<double>::epsilon() * A;
                c.require(std::abs(F - A) <= tol, "filtration at (" + std::to_string(d) + "," + std::to_string(m) + ")");
            }
    }
    const auto seq = brute_nk(1.0, kSqrt2, 100);
    for (std::size_t k = 0; k <= 100; ++k) {
        c.require(ec::filtered_rank(k, seq[k], kSqrt2) == 1, "rank at R = N_k, k=" + std::to_string(k));
        c.require(ec::filtered_rank(k, std::nextafter(seq[k], -1.0), kSqrt2) == 0,
                  "rank below N_k, k=" + std::to_string(k));
    }
    c.note("(d,m) <= 50 for a in {1, 0.8, 2.3}; rank flips at N_k for k <= 100");
    return c.outcome();
}

Outcome suspension_identities() {
    Checks c;
    struct Case {
        std::string name;
        dm::DiskMap map;
        double theta0;
        std::function<double(double)> f;  ///< action function in closed form, radial
        double calabi;
    };
    const std::vector<Case> cases{
        {"rotation", dm::DiskMap::rotation(0.3), 0.3, [](double) { return 0.3; }, 0.3},
        // f(r) = psi(1) - int_r^1 rho^2 psi'(rho) drho with psi = 0.3 r^2.
        {"twist", quadratic_twist(), 0.3, [](double r) { return 0.3 - 0.15 * (1.0 - std::pow(r, 4)); },
         twist_calabi_oracle([](double r) { return 0.3 * r * r; })},
    };
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (const auto& cs : cases) {
        const auto s = su::build_suspension(cs.map, cs.theta0);
        const auto contact = su::verify_contact(s, 2000);
        c.require(contact.min_F > 0.0, cs.name + ": min F = " + fmt15(contact.min_F));

        double rt = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Point x = random_disk_point(rng);
            rt = std::max(rt, std::abs(su::return_time(s, x, 1e-10) - cs.f(x.norm())));
        }
        c.require(rt <= 1e-8, cs.name + ": return time defect " + fmt15(rt));

        const double vol = su::contact_volume(s, 1e-9);
        c.require(std::abs(vol - cs.calabi) <= 1e-6, cs.name + ": volume " + fmt15(vol));

        double fd = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = u(rng);
            const Point x = random_disk_point(rng, 0.95);
            const double ang = 2.0 * std::numbers::pi * u(rng);
            const Point v(std::cos(ang), std::sin(ang));
            const double h = 1e-4;
            const double dbdt = (s.beta_t(t + h, x, v) - s.beta_t(t - h, x, v)) / (2 * h);
            const double dFdx = (s.F(t, x + h * v) - s.F(t, x - h * v)) / (2 * h);
            fd = std::max(fd, std::abs(dbdt - dFdx));
        }
        c.require(fd <= 1e-6, cs.name + ": d lambda0 - omega defect " + fmt15(fd));
        c.note(cs.name + " minF=" + fmt15(contact.min_F) + " rt=" + fmt15(rt) + " vol-cal=" +
               fmt15(std::abs(vol - cs.calabi)) + " fd=" + fmt15(fd));
    }
    return c.outcome();
}

Outcome boundary_twist() {
    Checks c;
    const double V = 0.2, eps = 0.05, target = V + eps;
    const auto search = su::find_boundary_twist(quadratic_twist(), 0.3, target, eps);
    c.require(search.result.has_value(), "no delta found");
    if (!search.result) return c.outcome();
    const auto& r = *search.result;
    const double delta = r.delta, r0 = 1.0 - delta;
    // New angle profile: 0.3 r^2 inside, psi on the collar.
    auto psi_new = [&](double x) { return x <= r0 ? 0.3 * x * x : r.psi.value(x); };
    const double cal_new = twist_calabi_oracle(psi_new);
    c.require(std::abs(cal_new - r.calabi_new) <= 1e-8, "calabi_new " + fmt15(r.calabi_new) + " vs " + fmt15(cal_new));
    c.require(std::abs(cal_new - V) < eps / 2, "calabi defect " + fmt15(std::abs(cal_new - V)));
    // On r <= 1 - delta, f_hat - f is the constant target - theta0 - int rho^2 (psi' - 0.6 rho) over the collar.
    const double shift = target - 0.3 -
                         gauss([&](double x) { return x * x * (r.psi.derivative(x) - 0.6 * x); }, r0, 1.0);
    double inner = 0.0;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 64; ++i) {
        const Point x = random_disk_point(rng, r0);
        const double f_old = 0.15 * (1.0 + std::pow(x.norm(), 4));
        c.require(std::abs(r.f_hat(x) - f_old - shift) <= 1e-9, "inner shift is not constant");
        inner = std::max(inner, std::abs(r.f_hat(x) - f_old));
    }
    c.require(inner < eps / 3, "inner defect " + fmt15(inner));
    c.require(r.toward_target && r.collar_min_action >= target - 1e-12, "collar actions fall below the target");
    c.note("delta=" + fmt15(delta) + " after " + std::to_string(search.deltas_tried.size()) +
           " tries, inner=" + fmt15(inner) + " calabi defect=" + fmt15(std::abs(cal_new - V)));
    return c.outcome();
}

Outcome bound_algebra() {
    Checks c;
    const double theta0 = 0.618, V = 0.3, eps = 0.01;
    const double cw = ec::nk_lower_bound(1.0, 1.0 / theta0, 100000).c_witness;
    const double ve = V + eps;
    const double limit = std::sqrt(theta0 * ve);
    c.require(std::abs(limit - 0.437698526385456) <= 1e-15, "limit " + fmt15(limit));
    c.require(std::abs(ec::mean_action_limit(theta0, V, eps) - limit) <= 1e-15, "module limit");

    // Admissibility: 2k(V + eps) <= 2k theta0 - c theta0^2 sqrt(k).
    auto admissible = [&](double k) { return 2 * k * ve <= 2 * k * theta0 - cw * theta0 * theta0 * std::sqrt(k); };
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 5000; ++k) {
        bool threw = false;
        double m = 0.0;
        try {
            m = ec::mean_action_bound(theta0, V, eps, k, cw);
        } catch (const DomainError&) {
            threw = true;
        }
        c.require(threw == !admissible(static_cast<double>(k)), "domain error mismatch at k=" + std::to_string(k));
        if (!threw) {
            c.require(m <= prev, "increase at k=" + std::to_string(k));
            prev = m;
        }
    }
    for (double e = 4; e <= 18; e += 1) {
        const auto k = static_cast<std::size_t>(std::pow(10.0, e));
        const double m = ec::mean_action_bound(theta0, V, eps, k, cw);
        c.require(m <= prev && m >= limit, "monotone/limit at k=1e" + fmt15(e));
        prev = m;
    }
    // The excess over the limit is theta0 * c * limit / (4 sqrt(k)) + O(1/k); choose k where it is below 1e-9.
    const double k_close = std::pow(theta0 * cw * limit / (4 * 1e-9) * 1.1, 2);
    const auto kc = static_cast<std::size_t>(k_close);
    const double close = ec::mean_action_bound(theta0, V, eps, kc, cw);
    c.require(std::abs(close - limit) <= 1e-9, "gap at k=" + fmt15(k_close) + " is " + fmt15(close - limit));
    const double at_1e8 = ec::mean_action_bound(theta0, V, eps, 100000000, cw);
    c.note("c=" + fmt15(cw) + " limit=" + fmt15(limit) + " gap at k=" + fmt15(static_cast<double>(kc)) + ": " +
           fmt15(close - limit) + "; gap at k=1e8: " + fmt15(at_1e8 - limit));
    return c.outcome();
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "calabi of rigid rotations", 1, rotation_calabi},
        {2, "calabi of the quadratic twist", 5, twist_calabi},
        {3, "calabi is a homomorphism on twists", 60, homomorphism},
        {4, "mean action theorem harness", 60, theorem_harness},
        {5, "N_k heap against enumeration", 30, nk_oracle},
        {6, "lattice point identity", 10, lattice_identity},
        {7, "N_k lower bound scan", 30, comb_scan},
        {8, "ellipsoid grading bijection", 10, ellipsoid_bijection},
        {9, "volume asymptotics of E(1, sqrt 2)", 30, volume_asymptotics},
        {10, "knot filtration and filtered ranks", 30, knot_filtration},
        {11, "suspension identities", 60, suspension_identities},
        {12, "boundary twist search", 30, boundary_twist},
        {13, "mean action bound algebra", 30, bound_algebra},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = cr.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= cr.budget_s) {
            out.pass = false;
            out.detail += "; over the " + fmt15(cr.budget_s) + " s budget";
        }
        if (!out.pass) ++failed;
        std::printf("%s %2d %-38s %8.3fs  %s\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name, secs, out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
