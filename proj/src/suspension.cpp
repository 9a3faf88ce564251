#include "calabi/suspension.hpp"

#include "calabi/errors.hpp"
#include "calabi/quadrature.hpp"
#include "calabi/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace calabi::suspension {

using diskmap::ActionProfile;
using diskmap::DiskMap;

namespace {

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
/// int_0^u smoothstep
double smoothstep_integral(double u) { return u * u * u - 0.5 * u * u * u * u; }

/// int_0^1 F(t, x) dt for fixed f(x), f(phi(x)).
quad::Result time_integral(const Suspension& s, double fx, double fphix, double tol) {
    const auto cuts = s.profile().knots();
    return quad::integrate([&](double t) { return s.F_from(t, fx, fphix); }, 0.0, 1.0, {tol, 4000}, cuts);
}

std::string hint_shift(double fmin) {
    const double n = std::floor(-fmin) + 1.0;
    return "replace theta0 by theta0 + n for an integer n >= " + fmt15(n) +
           " (the boundary angle is only defined modulo 1)";
}

}  // namespace

// ------------------------------------------------------------- SmoothingProfile

SmoothingProfile::SmoothingProfile(double eps, double depth, double t_start) : eps_(eps), t0_(t_start) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("smoothing eps must lie in (0, 1)");
    if (!(depth > 0.0 && depth < 1.0)) throw PreconditionError("smoothing depth must lie in (0, 1)");
    if (!(t_start > 0.0 && t_start < 0.5)) throw PreconditionError("smoothing start must lie in (0, 0.5)");
    dip_ = depth * eps;
    h_ = 0.5 * dip_ * (1.0 - t0_) / (0.5 + dip_);
    t3_ = (1.0 + dip_ * t0_ - 0.5 * h_) / (1.0 + dip_);
}

double SmoothingProfile::deta(double t) const {
    if (t <= t0_) return 0.0;
    if (t < t0_ + h_) return -dip_ * smoothstep((t - t0_) / h_);
    if (t <= t3_) return -dip_;
    if (t < t3_ + h_) return -dip_ + (1.0 + dip_) * smoothstep((t - t3_) / h_);
    return 1.0;
}

double SmoothingProfile::eta(double t) const {
    if (t <= t0_) return 0.0;
    if (t < t0_ + h_) return -dip_ * h_ * smoothstep_integral((t - t0_) / h_);
    const double e1 = -0.5 * dip_ * h_;
    if (t <= t3_) return e1 - dip_ * (t - t0_ - h_);
    const double e2 = e1 - dip_ * (t3_ - t0_ - h_);
    if (t < t3_ + h_) return e2 - dip_ * (t - t3_) + (1.0 + dip_) * h_ * smoothstep_integral((t - t3_) / h_);
    const double e3 = e2 - dip_ * h_ + 0.5 * (1.0 + dip_) * h_;
    return e3 + (t - t3_ - h_);
}

// ------------------------------------------------------------------ Suspension

Suspension::Suspension(ActionProfile f, SmoothingProfile profile, double f_min, double f_max)
    : f_(std::move(f)), profile_(profile), f_min_(f_min), f_max_(f_max) {}

double Suspension::F_from(double t, double fx, double fphix) const {
    const double d = profile_.deta(t);
    return (1.0 - d) * fx + d * fphix;
}

double Suspension::F(double t, const Point& x) const { return F_from(t, f_(x), f_(diskmap::eval_map(map(), x))); }

double Suspension::beta_t(double t, const Point& x, const Point& v) const {
    const auto j = diskmap::jet(map(), x);
    const double e = profile_.eta(t);
    const double df = diskmap::pullback_difference(map(), x, v);
    const double pull_df = diskmap::pullback_difference(map(), j.value, j.jacobian * v);
    return diskmap::beta(x, v) + (t - e) * df + e * pull_df;
}

LambdaComponents Suspension::lambda0(double t, const Point& x) const {
    LambdaComponents c;
    c.dt = F(t, x);
    const double r = x.norm();
    if (r > 0.0) {
        c.dr = beta_t(t, x, x / r);
        c.dtheta = beta_t(t, x, Point(-x.y(), x.x()));
    }
    return c;
}

Suspension build_suspension(const DiskMap& map, double theta0, std::optional<SmoothingProfile> profile,
                            double quad_tol, int positivity_samples) {
    if (positivity_samples < 1) throw PreconditionError("positivity_samples must be >= 1");
    ActionProfile f(map, theta0, quad_tol);

    std::vector<Point> pts = halton_disk(static_cast<std::size_t>(positivity_samples));
    pts.emplace_back(0.0, 0.0);
    for (int i = 0; i < 16; ++i) pts.push_back(polar_point(1.0, kTwoPi * i / 16.0));
    if (map.radially_symmetric()) {
        for (int i = 0; i <= 512; ++i) pts.emplace_back(i / 512.0, 0.0);
        for (double b : map.ray_breakpoints(0.0)) pts.emplace_back(b, 0.0);
    }
    double fmin = INFINITY, fmax = -INFINITY;
    for (const auto& p : pts) {
        const double v = f(p);
        fmin = std::min(fmin, v);
        fmax = std::max(fmax, v);
    }
    if (!(fmin > 0.0))
        throw PreconditionError("the action function is not positive (sampled min f = " + fmt15(fmin) + "); " +
                                hint_shift(fmin));
    const double ratio = fmin / fmax;
    if (!profile) return Suspension(std::move(f), SmoothingProfile(0.5 * ratio), fmin, fmax);
    if (!(profile->eps() < ratio))
        throw PreconditionError("invalid smoothing profile: eps = " + fmt15(profile->eps()) +
                                " must be below min f / max f = " + fmt15(ratio));
    return Suspension(std::move(f), *profile, fmin, fmax);
}

ContactReport verify_contact(const Suspension& s, int n_samples) {
    if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
    std::vector<Point> pts{Point::Zero()};
    const auto h = halton_disk(static_cast<std::size_t>(n_samples));
    pts.insert(pts.end(), h.begin(), h.end());
    const auto& prof = s.profile();
    ContactReport rep;
    rep.min_F = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double fx = s.action()(pts[i]);
        const double fphix = s.action()(diskmap::eval_map(s.map(), pts[i]));
        for (double t : {radical_inverse(i + 1, 5), prof.dip_time(), prof.top_time(), 0.0}) {
            const double F = s.F_from(t, fx, fphix);
            if (F < rep.min_F) {
                rep.min_F = F;
                rep.argmin_t = t;
                rep.argmin_x = pts[i];
            }
        }
    }
    rep.pass = rep.min_F > 0.0;
    return rep;
}

double return_time(const Suspension& s, const Point& x, double quad_tol) {
    if (!(quad_tol > 0.0)) throw PreconditionError("quad_tol must be positive");
    const double fx = s.action()(x);
    const double fphix = s.action()(diskmap::eval_map(s.map(), x));
    return time_integral(s, fx, fphix, quad_tol).value;
}

double contact_volume(const Suspension& s, double quad_tol) {
    if (!(quad_tol > 0.0)) throw PreconditionError("quad_tol must be positive");
    const auto& map = s.map();
    // Area form of mass 1 in (u, v) = (r^2, theta / 2 pi) is du dv.
    auto column = [&](const Point& x) {
        const double fx = s.action()(x);
        const double fphix = s.action()(diskmap::eval_map(map, x));
        return time_integral(s, fx, fphix, 0.01 * quad_tol).value;
    };
    if (map.radially_symmetric()) {
        std::vector<double> cuts;
        for (double b : map.ray_breakpoints(0.0)) cuts.push_back(b * b);
        return quad::integrate([&](double u) { return column(Point(std::sqrt(u), 0.0)); }, 0.0, 1.0,
                               {0.5 * quad_tol, 4000}, cuts)
            .value;
    }
    std::vector<double> vcuts;
    for (double a : diskmap::angular_breakpoints(map)) vcuts.push_back(a / kTwoPi);
    return quad::integrate(
               [&](double v) {
                   const double theta = kTwoPi * v;
                   std::vector<double> ucuts;
                   for (double b : map.ray_breakpoints(theta)) ucuts.push_back(b * b);
                   return quad::integrate([&](double u) { return column(polar_point(std::sqrt(u), theta)); }, 0.0,
                                          1.0, {0.25 * quad_tol, 4000}, ucuts)
                       .value;
               },
               0.0, 1.0, {0.5 * quad_tol, 4000}, vcuts)
        .value;
}

BindingData binding_data(double theta0) {
    if (theta0 == 0.0 || !std::isfinite(theta0)) throw DomainError("binding data needs a finite nonzero theta0");
    return {1.0, 1.0 / theta0, true};
}

SuspensionReport suspension_report(const Suspension& s, int n_samples, double quad_tol) {
    SuspensionReport r;
    r.samples = n_samples;
    r.min_F = verify_contact(s, n_samples).min_F;
    r.volume = contact_volume(s, quad_tol);
    r.calabi = diskmap::calabi(s.map(), s.theta0(), quad_tol).value;
    for (const auto& p : halton_disk(static_cast<std::size_t>(std::min(n_samples, 100)), 7))
        r.max_return_time_defect = std::max(r.max_return_time_defect, std::abs(return_time(s, p, quad_tol) - s.action()(p)));
    return r;
}

nlohmann::ordered_json report_json(const Suspension& s, const SuspensionReport& r) {
    nlohmann::ordered_json j;
    j["min_F"] = round15(r.min_F);
    j["volume"] = round15(r.volume);
    j["calabi"] = round15(r.calabi);
    j["max_return_time_defect"] = round15(r.max_return_time_defect);
    j["theta0"] = round15(s.theta0());
    j["map_kind"] = s.map().kind_name();
    j["eps_eta"] = round15(s.profile().eps());
    j["f_min"] = round15(s.f_min());
    j["f_max"] = round15(s.f_max());
    j["contact"] = r.min_F > 0.0;
    const auto b = binding_data(s.theta0());
    j["binding"] = {{"action", round15(b.action)}, {"rotation", round15(b.rotation)}, {"elliptic", b.elliptic}};
    j["samples"] = r.samples;
    return j;
}

std::string heatmap_svg(const Suspension& s, int nt, int nr) {
    if (!s.map().radially_symmetric()) throw PreconditionError("the heat map needs a radially symmetric map");
    if (nt < 1 || nr < 1) throw PreconditionError("heat map resolution must be positive");
    std::vector<double> fr(static_cast<std::size_t>(nr)), fphir(static_cast<std::size_t>(nr));
    for (int j = 0; j < nr; ++j) {
        const Point x((j + 0.5) / nr, 0.0);
        fr[j] = s.action()(x);
        fphir[j] = s.action()(diskmap::eval_map(s.map(), x));
    }
    std::vector<double> vals;
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nr; ++j) vals.push_back(s.F_from((i + 0.5) / nt, fr[j], fphir[j]));
    const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
    const double lo = *lo_it, span = std::max(*hi_it - lo, 1e-300);
    const int cell = 6, w = nt * cell, h = nr * cell;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 80 << "\" height=\"" << h + 40 << "\">\n";
    os << "<text x=\"4\" y=\"14\" font-size=\"12\">F(t, r): t to the right, r upward; min " << fmt15(lo) << ", max "
       << fmt15(*hi_it) << "</text>\n<g transform=\"translate(40,24)\">\n";
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nr; ++j) {
            const double u = (vals[static_cast<std::size_t>(i * nr + j)] - lo) / span;
            const int red = static_cast<int>(std::lround(255 * u));
            const int blue = 255 - red;
            os << "<rect x=\"" << i * cell << "\" y=\"" << (nr - 1 - j) * cell << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ",64," << blue << ")\"/>\n";
        }
    os << "</g>\n</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------- boundary twist

PiecewisePolynomial default_twist_angle(double delta, double from, double to) {
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("delta must lie in (0, 1]");
    const double lo = 1.0 - delta, a = lo + delta / 8.0, b = 1.0 - delta / 8.0, w = b - a;
    const double d = to - from;
    return PiecewisePolynomial({{lo, a, {from}},
                                {a, b, {from, 0.0, 3.0 * d / (w * w), -2.0 * d / (w * w * w)}},
                                {b, 1.0, {to}}});
}

BoundaryTwistResult boundary_twist(const DiskMap& map, double theta0, const BoundaryTwistSpec& spec, double quad_tol,
                                   int inner_samples) {
    const double delta = spec.delta;
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
    diskmap::check_boundary_angle(map, theta0);
    const double r0 = 1.0 - delta;
    const auto old = map.collar_profile(r0);
    if (!old)
        throw PreconditionError("the map is not a radial twist on r >= " + fmt15(r0) +
                                "; choose delta at most its collar width " + fmt15(map.collar_radius()));
    const double shift = theta0 - old->value(1.0);
    const double start = old->value(r0) + shift;

    PiecewisePolynomial psi = spec.psi ? *spec.psi : default_twist_angle(delta, start, spec.target);
    if (std::abs(psi.lo() - r0) > 1e-12 || std::abs(psi.hi() - 1.0) > 1e-12)
        throw PreconditionError("invalid twist spec: psi must be defined on [1 - delta, 1]");
    if (std::abs(psi.value(r0) - start) > 1e-9)
        throw PreconditionError("invalid twist spec: psi(1 - delta) = " + fmt15(psi.value(r0)) +
                                " but the map turns that circle by " + fmt15(start));
    if (std::abs(psi.value(1.0) - spec.target) > 1e-9)
        throw PreconditionError("invalid twist spec: psi(1) must equal the target");
    const double slope = std::max(1.0, std::abs(psi.value(1.0) - psi.value(r0)) / delta);
    if (psi.max_value_jump() > 1e-9 || psi.max_derivative_jump() > 1e-9 * slope)
        throw PreconditionError("invalid twist spec: psi must be C^1");
    int sign = 0;
    for (int i = 0; i <= 256; ++i) {
        const double d = psi.derivative(r0 + delta * i / 256.0);
        const int sd = d > 1e-12 ? 1 : (d < -1e-12 ? -1 : 0);
        if (sd != 0 && sign != 0 && sd != sign) throw PreconditionError("invalid twist spec: psi must be monotone");
        if (sd != 0) sign = sd;
    }

    // Shift the old profile so it is measured against theta0, then replace its tail by psi.
    const PiecewisePolynomial old_shifted = *old + PiecewisePolynomial::constant(r0, 1.0, shift);
    const PiecewisePolynomial chi_tail = psi - old_shifted;
    double chi_max = 0.0;
    for (const auto& p : chi_tail.pieces())
        for (double c : p.coeffs) chi_max = std::max(chi_max, std::abs(c));

    DiskMap new_map = map;
    if (chi_max > 0.0) {
        if (const auto* rr = std::get_if<diskmap::RigidRotation>(&map.kind())) {
            new_map = DiskMap::twist(diskmap::TwistProfile(
                PiecewisePolynomial::constant(0.0, r0, rr->theta0).joined(psi - PiecewisePolynomial::constant(r0, 1.0, shift)),
                false, false));
        } else if (const auto* tw = std::get_if<diskmap::RadialTwist>(&map.kind())) {
            const auto& full = tw->profile.psi();
            new_map = DiskMap::twist(diskmap::TwistProfile(
                full.restricted(full.lo(), r0).joined(psi - PiecewisePolynomial::constant(r0, 1.0, shift)), false,
                false));
        } else {
            const auto chi = PiecewisePolynomial::constant(0.0, r0, 0.0).joined(chi_tail);
            new_map = DiskMap::composition({map, DiskMap::twist(diskmap::TwistProfile(chi, false, false))});
        }
    }
    const ActionProfile f_old(map, theta0, 0.1 * quad_tol);
    ActionProfile f_hat(new_map, spec.target, 0.1 * quad_tol);

    BoundaryTwistResult out{new_map, f_hat, psi};
    out.delta = delta;
    out.start_angle = start;
    out.inner_shift = spec.target - theta0 - psi.r2_weighted_derivative_integral(r0, 1.0) +
                      old_shifted.r2_weighted_derivative_integral(r0, 1.0);
    std::vector<Point> pts{Point::Zero(), Point(r0, 0.0)};
    for (const auto& p : halton_disk(static_cast<std::size_t>(std::max(inner_samples, 1)), 3)) pts.push_back(r0 * p);
    for (const auto& p : pts) out.inner_defect = std::max(out.inner_defect, std::abs(f_hat(p) - f_old(p)));
    out.calabi_old = diskmap::calabi(map, theta0, quad_tol).value;
    out.calabi_new = diskmap::calabi(new_map, spec.target, quad_tol).value;
    out.calabi_defect = std::abs(out.calabi_new - out.calabi_old);
    out.toward_target = (start - spec.target) * (theta0 - start) >= 0.0;
    out.collar_min_action = INFINITY;
    for (int i = 0; i <= 64; ++i)
        out.collar_min_action = std::min(out.collar_min_action, f_hat(Point(r0 + delta * i / 64.0, 0.0)));
    return out;
}

TwistSearch find_boundary_twist(const DiskMap& map, double theta0, double target, double eps, double delta0,
                                int max_halvings, double quad_tol) {
    if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
    TwistSearch search;
    double delta = delta0;
    for (int i = 0; i <= max_halvings; ++i, delta *= 0.5) {
        search.deltas_tried.push_back(delta);
        auto r = boundary_twist(map, theta0, {delta, target, std::nullopt}, quad_tol);
        if (r.toward_target && r.inner_defect < eps / 3.0 && r.calabi_defect < eps / 2.0) {
            search.result = std::move(r);
            break;
        }
    }
    return search;
}

nlohmann::ordered_json twist_json(const BoundaryTwistResult& r, double eps) {
    nlohmann::ordered_json j;
    j["delta"] = round15(r.delta);
    j["start_angle"] = round15(r.start_angle);
    j["target"] = round15(r.f_hat.theta0());
    j["inner_shift"] = round15(r.inner_shift);
    j["inner_defect"] = round15(r.inner_defect);
    j["calabi_old"] = round15(r.calabi_old);
    j["calabi_new"] = round15(r.calabi_new);
    j["calabi_defect"] = round15(r.calabi_defect);
    j["collar_min_action"] = round15(r.collar_min_action);
    j["toward_target"] = r.toward_target;
    j["eps"] = round15(eps);
    j["inner_ok"] = r.inner_defect < eps / 3.0;
    j["calabi_ok"] = r.calabi_defect < eps / 2.0;
    return j;
}

}  // namespace calabi::suspension
