#include "calabi/diskmap.hpp"

#include "calabi/errors.hpp"
#include "calabi/report.hpp"
#include "calabi/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace calabi::diskmap {

namespace {

constexpr double kDiskSlack = 1e-12;
constexpr double kAngleTol = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Mat2 symplectic_j() {
    Mat2 j;
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
}

void check_in_disk(const Point& p) {
    if (!(p.norm() <= 1.0 + kDiskSlack))
        throw DomainError("point (" + fmt15(p.x()) + ", " + fmt15(p.y()) + ") is outside the unit disk");
}

double time_factor(const std::vector<double>& c, double t) { return poly::eval(c, t); }

/// One implicit-midpoint step x -> x + h J grad H(t + h/2, (x + x')/2).
/// Updates the Jacobian through the Cayley transform of h J Hess H / 2.
void midpoint_step(const Hamiltonian& ham, double t, double h, Point& x, Mat2* d) {
    static const Mat2 jm = symplectic_j();
    const double tm = t + 0.5 * h;
    Point m = x + 0.5 * h * (jm * ham.gradient(tm, x));
    for (int it = 0; it < 60; ++it) {
        const Point g = m - x - 0.5 * h * (jm * ham.gradient(tm, m));
        const Mat2 dg = Mat2::Identity() - 0.5 * h * jm * ham.hessian(tm, m);
        const Point delta = dg.partialPivLu().solve(g);
        m -= delta;
        if (delta.norm() <= 2e-16 * (1.0 + m.norm())) break;
    }
    x = 2.0 * m - x;
    if (d) {
        const Mat2 a = 0.5 * h * jm * ham.hessian(tm, m);
        *d = (Mat2::Identity() - a).partialPivLu().solve((Mat2::Identity() + a) * (*d));
    }
}

template <class StepFn>
void flow_substeps(const HamiltonianFlow& flow, StepFn&& step) {
    const double h = 1.0 / flow.steps;
    if (flow.integrator == Integrator::Midpoint) {
        for (int i = 0; i < flow.steps; ++i) step(i * h, h);
        return;
    }
    const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double g2 = 1.0 - 2.0 * g1;
    for (int i = 0; i < flow.steps; ++i) {
        double t = i * h;
        step(t, g1 * h);
        t += g1 * h;
        step(t, g2 * h);
        t += g2 * h;
        step(t, g1 * h);
    }
}

MapJet flow_jet(const HamiltonianFlow& flow, const Point& p, bool with_jacobian) {
    MapJet out{p, Mat2::Identity()};
    if (flow.hamiltonian.empty()) return out;
    Mat2* d = with_jacobian ? &out.jacobian : nullptr;
    flow_substeps(flow, [&](double t, double h) { midpoint_step(flow.hamiltonian, t, h, out.value, d); });
    return out;
}

MapJet twist_jet(const TwistProfile& prof, const Point& p) {
    const double r = p.norm();
    const double rc = std::min(r, 1.0);
    const double alpha = kTwoPi * prof.value(rc);
    const Mat2 rot = rotation_matrix(alpha);
    MapJet out{rot * p, rot};
    if (r > 0.0) {
        static const Mat2 jm = symplectic_j();
        const double dalpha = kTwoPi * prof.derivative(rc);
        out.jacobian += (rot * (jm * p)) * (dalpha / r) * p.transpose();
    }
    return out;
}

MapJet jet_impl(const DiskMap& map, const Point& p, bool with_jacobian) {
    return std::visit(
        overloaded{
            [&](const RigidRotation& rr) {
                const Mat2 rot = rotation_matrix(kTwoPi * rr.theta0);
                return MapJet{rot * p, rot};
            },
            [&](const RadialTwist& tw) { return twist_jet(tw.profile, p); },
            [&](const HamiltonianFlow& fl) { return flow_jet(fl, p, with_jacobian); },
            [&](const Composition& c) {
                MapJet acc{p, Mat2::Identity()};
                for (const auto& f : c.factors) {
                    const MapJet j = jet_impl(f, acc.value, with_jacobian);
                    acc.value = j.value;
                    if (with_jacobian) acc.jacobian = j.jacobian * acc.jacobian;
                }
                return acc;
            },
        },
        map.kind());
}

/// Angles (radians) at which rays start or stop meeting a bump support.
void collect_angular_breakpoints(const DiskMap& map, std::vector<double>& out) {
    std::visit(overloaded{
                   [&](const HamiltonianFlow& fl) {
                       for (const auto& t : fl.hamiltonian.terms()) {
                           if (t.kind != HamiltonianTerm::Kind::Bump) continue;
                           const double dist = t.center.norm();
                           if (dist <= t.radius) continue;
                           const double base = std::atan2(t.center.y(), t.center.x());
                           const double half = std::asin(t.radius / dist);
                           for (double a : {base - half, base, base + half}) {
                               double w = std::fmod(a, kTwoPi);
                               if (w < 0) w += kTwoPi;
                               out.push_back(w);
                           }
                       }
                   },
                   [&](const Composition& c) {
                       for (const auto& f : c.factors) collect_angular_breakpoints(f, out);
                   },
                   [](const auto&) {},
               },
               map.kind());
}

}  // namespace

// ---------------------------------------------------------------- TwistProfile

TwistProfile::TwistProfile(PiecewisePolynomial psi, bool flat_at_origin, bool require_c1)
    : psi_(std::move(psi)), flat_at_origin_(flat_at_origin) {
    if (psi_.empty()) throw PreconditionError("twist profile has no pieces");
    if (std::abs(psi_.hi() - 1.0) > 1e-12) throw PreconditionError("twist profile must end at r = 1");
    if (psi_.lo() < -1e-12 || psi_.lo() >= 1.0) throw PreconditionError("twist profile must start in [0, 1)");
    if (psi_.max_value_jump() > 1e-9) throw PreconditionError("twist profile is discontinuous");
    if (require_c1 && !is_c1()) throw PreconditionError("twist profile is not C^1");
    if (flat_at_origin_ && !smooth_at_origin())
        throw PreconditionError("twist profile marked flat_at_origin has psi'(0) != 0");
}

double TwistProfile::value(double r) const { return psi_.value(std::clamp(r, psi_.lo(), 1.0)); }

double TwistProfile::derivative(double r) const { return psi_.derivative(std::clamp(r, psi_.lo(), 1.0)); }

bool TwistProfile::smooth_at_origin() const { return psi_.lo() > 0.0 || std::abs(psi_.derivative(0.0)) <= 1e-12; }

bool TwistProfile::is_c1() const { return psi_.max_derivative_jump() <= 1e-9; }

double TwistProfile::collar_width() const { return 1.0 - psi_.constant_tail_start(1e-15); }

// ----------------------------------------------------------------- Hamiltonian

Hamiltonian::Hamiltonian(std::vector<HamiltonianTerm> terms) : terms_(std::move(terms)) {
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        const std::string tag = "hamiltonian term " + std::to_string(i);
        if (t.time_coeffs.empty()) throw PreconditionError(tag + ": empty time profile");
        if (t.kind == HamiltonianTerm::Kind::Bump) {
            if (!(t.radius > 0.0)) throw PreconditionError(tag + ": bump radius must be positive");
            if (t.power < 3) throw PreconditionError(tag + ": bump power must be >= 3 for a C^2 Hamiltonian");
            if (t.center.norm() > 0.0 && t.center.norm() + t.radius > 1.0 + 1e-12)
                throw DomainError(tag + ": off-centre bump must be supported inside the disk");
        }
    }
}

double Hamiltonian::value(double t, const Point& x) const {
    double h = 0.0;
    for (const auto& term : terms_) {
        const double tau = time_factor(term.time_coeffs, t);
        if (term.kind == HamiltonianTerm::Kind::Quadratic) {
            h += tau * 0.5 * term.amplitude * x.squaredNorm();
        } else {
            const double u = 1.0 - (x - term.center).squaredNorm() / (term.radius * term.radius);
            if (u > 0.0) h += tau * term.amplitude * std::pow(u, term.power);
        }
    }
    return h;
}

Point Hamiltonian::gradient(double t, const Point& x) const {
    Point g = Point::Zero();
    for (const auto& term : terms_) {
        const double tau = time_factor(term.time_coeffs, t);
        if (term.kind == HamiltonianTerm::Kind::Quadratic) {
            g += tau * term.amplitude * x;
        } else {
            const Point y = x - term.center;
            const double r2 = term.radius * term.radius;
            const double u = 1.0 - y.squaredNorm() / r2;
            if (u > 0.0) g += tau * term.amplitude * term.power * std::pow(u, term.power - 1) * (-2.0 / r2) * y;
        }
    }
    return g;
}

Mat2 Hamiltonian::hessian(double t, const Point& x) const {
    Mat2 hs = Mat2::Zero();
    for (const auto& term : terms_) {
        const double tau = time_factor(term.time_coeffs, t);
        if (term.kind == HamiltonianTerm::Kind::Quadratic) {
            hs += tau * term.amplitude * Mat2::Identity();
        } else {
            const Point y = x - term.center;
            const double r2 = term.radius * term.radius;
            const double u = 1.0 - y.squaredNorm() / r2;
            if (u <= 0.0) continue;
            const double p = term.power;
            hs += tau * term.amplitude * p *
                  ((p - 1.0) * std::pow(u, p - 2.0) * (4.0 / (r2 * r2)) * (y * y.transpose()) -
                   std::pow(u, p - 1.0) * (2.0 / r2) * Mat2::Identity());
        }
    }
    return hs;
}

bool Hamiltonian::radial() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const HamiltonianTerm& t) {
        return t.kind == HamiltonianTerm::Kind::Quadratic || t.center.norm() == 0.0;
    });
}

double Hamiltonian::bump_extent() const {
    double e = 0.0;
    for (const auto& t : terms_)
        if (t.kind == HamiltonianTerm::Kind::Bump) e = std::max(e, t.center.norm() + t.radius);
    return e;
}

// --------------------------------------------------------------------- DiskMap

DiskMap DiskMap::rotation(double theta0) {
    return DiskMap(std::make_shared<const Node>(Node{RigidRotation{theta0}, theta0, 1.0, true}));
}

DiskMap DiskMap::twist(TwistProfile profile) {
    if (profile.lo() != 0.0) throw PreconditionError("a radial twist map needs a profile on [0, 1]");
    const double angle = profile.boundary_value();
    const double collar = profile.collar_width();
    return DiskMap(std::make_shared<const Node>(Node{RadialTwist{std::move(profile)}, angle, collar, true}));
}

DiskMap DiskMap::hamiltonian_flow(Hamiltonian h, int steps, Integrator integrator) {
    if (steps < 1) throw PreconditionError("hamiltonian flow needs at least one step");
    HamiltonianFlow flow{std::move(h), steps, integrator};
    const double extent = flow.hamiltonian.bump_extent();
    const double collar = extent > 0.0 ? std::max(0.0, 1.0 - extent) : 1.0;
    for (const auto& t : flow.hamiltonian.terms())
        if (t.kind == HamiltonianTerm::Kind::Bump && t.center.norm() > 0.0 && t.center.norm() + t.radius > 1.0)
            throw DomainError("bump term is not supported inside the disk");

    // Boundary rotation: follow (1, 0) and unwrap the angle step by step.
    double angle = 0.0;
    Point x(1.0, 0.0);
    if (!flow.hamiltonian.empty()) {
        flow_substeps(flow, [&](double t, double h) {
            const Point prev = x;
            midpoint_step(flow.hamiltonian, t, h, x, nullptr);
            angle += std::atan2(cross(prev, x), prev.dot(x));
        });
        if (std::abs(x.norm() - 1.0) > 1e-10)
            throw DomainError("hamiltonian flow does not preserve the boundary circle");
    }
    const bool radial = flow.hamiltonian.radial();
    return DiskMap(std::make_shared<const Node>(Node{std::move(flow), angle / kTwoPi, collar, radial}));
}

DiskMap DiskMap::composition(std::vector<DiskMap> factors) {
    double angle = 0.0, collar = 1.0;
    bool radial = true;
    for (const auto& f : factors) {
        angle += f.boundary_angle();
        collar = std::min(collar, f.collar_radius());
        radial = radial && f.radially_symmetric();
    }
    return DiskMap(std::make_shared<const Node>(Node{Composition{std::move(factors)}, angle, collar, radial}));
}

std::string DiskMap::kind_name() const {
    return std::visit(overloaded{
                          [](const RigidRotation&) { return std::string("rotation"); },
                          [](const RadialTwist&) { return std::string("twist"); },
                          [](const HamiltonianFlow&) { return std::string("hamiltonian"); },
                          [](const Composition&) { return std::string("composition"); },
                      },
                      kind());
}

std::optional<PiecewisePolynomial> DiskMap::collar_profile(double r_start) const {
    if (!(r_start >= 0.0 && r_start < 1.0)) return std::nullopt;
    return std::visit(
        overloaded{
            [&](const RigidRotation& rr) -> std::optional<PiecewisePolynomial> {
                return PiecewisePolynomial::constant(r_start, 1.0, rr.theta0);
            },
            [&](const RadialTwist& tw) -> std::optional<PiecewisePolynomial> {
                return tw.profile.psi().restricted(r_start, 1.0);
            },
            [&](const HamiltonianFlow&) -> std::optional<PiecewisePolynomial> {
                if (r_start + 1e-15 < 1.0 - collar_radius()) return std::nullopt;
                return PiecewisePolynomial::constant(r_start, 1.0, boundary_angle());
            },
            [&](const Composition& c) -> std::optional<PiecewisePolynomial> {
                PiecewisePolynomial acc = PiecewisePolynomial::constant(r_start, 1.0, 0.0);
                for (const auto& f : c.factors) {
                    auto p = f.collar_profile(r_start);
                    if (!p) return std::nullopt;
                    acc = acc + *p;
                }
                return acc;
            },
        },
        kind());
}

std::vector<double> DiskMap::ray_breakpoints(double theta) const {
    std::vector<double> out;
    const Point e(std::cos(theta), std::sin(theta));
    std::visit(overloaded{
                   [](const RigidRotation&) {},
                   [&](const RadialTwist& tw) {
                       for (double b : tw.profile.psi().breakpoints()) out.push_back(b);
                   },
                   [&](const HamiltonianFlow& fl) {
                       for (const auto& t : fl.hamiltonian.terms()) {
                           if (t.kind != HamiltonianTerm::Kind::Bump) continue;
                           // |rho e - c| = radius
                           const double ec = e.dot(t.center);
                           const double disc = ec * ec - t.center.squaredNorm() + t.radius * t.radius;
                           if (disc < 0.0) continue;
                           const double s = std::sqrt(disc);
                           out.push_back(ec - s);
                           out.push_back(ec + s);
                           out.push_back(ec);
                       }
                   },
                   [&](const Composition& c) {
                       for (const auto& f : c.factors) {
                           auto b = f.ray_breakpoints(theta);
                           out.insert(out.end(), b.begin(), b.end());
                       }
                   },
               },
               kind());
    const double inner = 1.0 - collar_radius();
    out.push_back(inner);
    std::erase_if(out, [](double r) { return !(r > 0.0 && r < 1.0); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> angular_breakpoints(const DiskMap& map) {
    std::vector<double> out;
    collect_angular_breakpoints(map, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ------------------------------------------------------------------ operations

MapJet jet(const DiskMap& map, const Point& p) {
    check_in_disk(p);
    return jet_impl(map, p, true);
}

Point eval_map(const DiskMap& map, const Point& p) {
    check_in_disk(p);
    return jet_impl(map, p, false).value;
}

Mat2 jacobian(const DiskMap& map, const Point& p) { return jet(map, p).jacobian; }

double pullback_difference(const DiskMap& map, const Point& q, const Point& v) {
    const MapJet j = jet(map, q);
    return beta(j.value, j.jacobian * v) - beta(q, v);
}

void check_boundary_angle(const DiskMap& map, double theta0) {
    const double diff = theta0 - map.boundary_angle();
    if (std::abs(diff - std::round(diff)) > kAngleTol)
        throw DomainError("theta0 = " + fmt15(theta0) + " does not match the boundary rotation " +
                          fmt15(map.boundary_angle()) + " modulo integers");
}

namespace {

double radial_path_action(const DiskMap& map, double theta0, const Point& p, double quad_tol) {
    check_in_disk(p);
    const double r0 = std::min(p.norm(), 1.0);
    const double theta = r0 > 0.0 ? std::atan2(p.y(), p.x()) : 0.0;
    const Point e(std::cos(theta), std::sin(theta));
    const double upper = std::max(r0, 1.0 - map.collar_radius());
    if (upper <= r0) return theta0;
    const auto cuts = map.ray_breakpoints(theta);
    const auto res = quad::integrate(
        [&](double rho) { return pullback_difference(map, rho * e, e); }, r0, upper, {quad_tol, 4000}, cuts);
    return theta0 - res.value;
}

}  // namespace

double action_function(const DiskMap& map, double theta0, const Point& p, double quad_tol) {
    return ActionProfile(map, theta0, quad_tol)(p);
}

ActionProfile::ActionProfile(DiskMap map, double theta0, double quad_tol)
    : map_(std::move(map)), theta0_(theta0), quad_tol_(quad_tol) {
    if (!(quad_tol > 0.0)) throw PreconditionError("quad_tol must be positive");
    check_boundary_angle(map_, theta0_);
}

bool ActionProfile::has_closed_form() const {
    return std::holds_alternative<RigidRotation>(map_.kind()) || std::holds_alternative<RadialTwist>(map_.kind());
}

double ActionProfile::operator()(const Point& p) const {
    if (const auto* rr = std::get_if<RigidRotation>(&map_.kind())) {
        check_in_disk(p);
        (void)rr;
        return theta0_;
    }
    if (const auto* tw = std::get_if<RadialTwist>(&map_.kind())) {
        check_in_disk(p);
        return tw->profile.action(p.norm()) + (theta0_ - tw->profile.boundary_value());
    }
    return path_integral(p);
}

double ActionProfile::path_integral(const Point& p) const { return radial_path_action(map_, theta0_, p, quad_tol_); }

std::string to_string(CalabiMethod m) {
    switch (m) {
        case CalabiMethod::Auto: return "auto";
        case CalabiMethod::PolarClosedForm: return "polar-closed-form";
        case CalabiMethod::Adaptive2d: return "adaptive-2d";
    }
    return "unknown";
}

CalabiResult calabi(const DiskMap& map, double theta0, double quad_tol, CalabiMethod method) {
    if (!(quad_tol > 0.0)) throw PreconditionError("quad_tol must be positive");
    check_boundary_angle(map, theta0);
    if (method == CalabiMethod::Auto)
        method = map.radially_symmetric() ? CalabiMethod::PolarClosedForm : CalabiMethod::Adaptive2d;

    if (method == CalabiMethod::PolarClosedForm) {
        if (!map.radially_symmetric())
            throw PreconditionError("polar quadrature needs a radially symmetric map");
        const ActionProfile f(map, theta0, 0.1 * quad_tol);
        const double inner_err = f.has_closed_form() ? 0.0 : 0.1 * quad_tol;
        const auto cuts = map.ray_breakpoints(0.0);
        const auto res = quad::integrate([&](double r) { return 2.0 * r * f(Point(r, 0.0)); }, 0.0, 1.0,
                                         {0.5 * quad_tol, 4000}, cuts);
        return {res.value, res.error + inner_err, CalabiMethod::PolarClosedForm};
    }

    // theta0 - V = (1 / 2 pi) int_0^{2 pi} int_0^1 rho^2 g(rho, theta) drho dtheta,
    // g = (phi^* beta - beta)(d_r).
    const double inner_tol = 0.25 * quad_tol;
    const double upper = 1.0 - map.collar_radius();
    std::vector<double> acuts;
    collect_angular_breakpoints(map, acuts);
    double inner_worst = 0.0;
    const auto outer = quad::integrate(
        [&](double theta) {
            if (upper <= 0.0) return 0.0;
            const Point e(std::cos(theta), std::sin(theta));
            const auto cuts = map.ray_breakpoints(theta);
            const auto r = quad::integrate(
                [&](double rho) { return rho * rho * pullback_difference(map, rho * e, e); }, 0.0, upper,
                {inner_tol, 4000}, cuts);
            inner_worst = std::max(inner_worst, r.error);
            return r.value;
        },
        0.0, kTwoPi, {0.5 * quad_tol * kTwoPi, 4000}, acuts);
    return {theta0 - outer.value / kTwoPi, outer.error / kTwoPi + inner_worst, CalabiMethod::Adaptive2d};
}

AreaReport verify_area_preservation(const DiskMap& map, int n_samples, double tol) {
    if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
    AreaReport rep;
    for (const auto& p : halton_disk(static_cast<std::size_t>(n_samples)))
        rep.max_defect = std::max(rep.max_defect, std::abs(jacobian(map, p).determinant() - 1.0));
    rep.pass = rep.max_defect <= tol;
    return rep;
}

}  // namespace calabi::diskmap
