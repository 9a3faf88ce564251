#pragma once

// Area-preserving maps of the closed unit disk that rotate rigidly near the
// boundary, their action function and Calabi invariant.
//
// Conventions: angles are in turns (theta0 = 0.25 is a quarter rotation);
// the area form has total mass 1; the primitive is beta = r^2/(2 pi) dtheta,
// so beta_q(v) = (q x v) / (2 pi).

#include "calabi/geometry.hpp"
#include "calabi/polynomial.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace calabi::diskmap {

inline constexpr double kDefaultQuadTol = 1e-9;

/// Radial twist angle psi(r) in turns. The domain is [lo, 1] with lo = 0 for
/// a full twist map, or the inner collar radius for a boundary twist.
class TwistProfile {
public:
    /// Throws PreconditionError when the pieces do not end at r = 1, are
    /// discontinuous, fail C^1 continuity (when `require_c1`), or when
    /// `flat_at_origin` is requested but psi'(0) != 0.
    explicit TwistProfile(PiecewisePolynomial psi, bool flat_at_origin = false, bool require_c1 = true);

    double value(double r) const;
    double derivative(double r) const;
    double boundary_value() const { return psi_.value(1.0); }
    double lo() const { return psi_.lo(); }
    const PiecewisePolynomial& psi() const { return psi_; }

    bool flat_at_origin() const { return flat_at_origin_; }
    /// psi'(r) = O(r) near 0, the condition for the twist map to be smooth at the origin.
    bool smooth_at_origin() const;
    bool is_c1() const;
    /// Width of the outer band on which psi is constant.
    double collar_width() const;

    /// Closed form of int_r^1 rho^2 psi'(rho) drho.
    double tail_moment(double r) const { return psi_.r2_weighted_derivative_integral(r, 1.0); }
    /// Action function of the twist: psi(1) - int_r^1 rho^2 psi'(rho) drho.
    double action(double r) const { return boundary_value() - tail_moment(r); }

private:
    PiecewisePolynomial psi_;
    bool flat_at_origin_;
};

/// One term of an autonomous-or-time-modulated Hamiltonian on the disk.
struct HamiltonianTerm {
    enum class Kind { Quadratic, Bump };
    Kind kind = Kind::Quadratic;
    /// Quadratic: H = amplitude * |x|^2 / 2 (generates rigid rotation).
    /// Bump:      H = amplitude * (1 - |x - center|^2 / radius^2)^power inside the bump, 0 outside.
    double amplitude = 0.0;
    Point center = Point::Zero();
    double radius = 1.0;
    int power = 3;
    /// Multiplies the term by tau(t) = sum_k time_coeffs[k] t^k.
    std::vector<double> time_coeffs{1.0};
};

class Hamiltonian {
public:
    Hamiltonian() = default;
    explicit Hamiltonian(std::vector<HamiltonianTerm> terms);

    double value(double t, const Point& x) const;
    Point gradient(double t, const Point& x) const;
    Mat2 hessian(double t, const Point& x) const;

    const std::vector<HamiltonianTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    /// Every term is rotation-invariant about the origin.
    bool radial() const;
    /// Radius beyond which only quadratic terms act (0 when there are no bumps).
    double bump_extent() const;

private:
    std::vector<HamiltonianTerm> terms_;
};

enum class Integrator {
    Midpoint,   ///< implicit midpoint, order 2
    Midpoint4,  ///< triple-jump composition of implicit midpoint, order 4
};

class DiskMap;

struct RigidRotation {
    double theta0;
};
struct RadialTwist {
    TwistProfile profile;
};
struct HamiltonianFlow {
    Hamiltonian hamiltonian;
    int steps;
    Integrator integrator;
};
/// Factors are applied in order: factors[0] first.
struct Composition {
    std::vector<DiskMap> factors;
};

/// Immutable, cheaply copyable handle to a disk map.
class DiskMap {
public:
    using Kind = std::variant<RigidRotation, RadialTwist, HamiltonianFlow, Composition>;

    static DiskMap rotation(double theta0);
    static DiskMap twist(TwistProfile profile);
    static DiskMap hamiltonian_flow(Hamiltonian h, int steps, Integrator integrator = Integrator::Midpoint4);
    static DiskMap composition(std::vector<DiskMap> factors);
    static DiskMap identity() { return rotation(0.0); }

    const Kind& kind() const { return node_->kind; }
    std::string kind_name() const;

    /// Rotation number on the boundary circle, in turns.
    double boundary_angle() const { return node_->boundary_angle; }
    /// The map is a rigid rotation by boundary_angle() on r >= 1 - collar_radius().
    double collar_radius() const { return node_->collar; }
    /// Commutes with all rotations about the origin.
    bool radially_symmetric() const { return node_->radial; }

    /// Turns by which the circle of radius r is rotated, for r in [r_start, 1],
    /// when the map acts on that annulus as a radial twist with polynomial
    /// profile. Empty when the map is not known to be of that form there.
    std::optional<PiecewisePolynomial> collar_profile(double r_start) const;

    /// Radii along the ray at angle `theta` (radians) where the path
    /// integrand of the action function may lose smoothness.
    std::vector<double> ray_breakpoints(double theta) const;

private:
    struct Node {
        Kind kind;
        double boundary_angle = 0.0;
        double collar = 1.0;
        bool radial = true;
    };
    explicit DiskMap(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Angles (radians, in [0, 2 pi)) at which rays start or stop meeting a bump support.
std::vector<double> angular_breakpoints(const DiskMap& map);

struct MapJet {
    Point value;
    Mat2 jacobian;
};

/// phi(p) and D phi(p). Throws DomainError for |p| > 1.
MapJet jet(const DiskMap& map, const Point& p);
Point eval_map(const DiskMap& map, const Point& p);
Mat2 jacobian(const DiskMap& map, const Point& p);

/// beta_q(v) for beta = r^2/(2 pi) dtheta.
inline double beta(const Point& q, const Point& v) { return cross(q, v) / kTwoPi; }

/// (phi^* beta - beta)_q (v).
double pullback_difference(const DiskMap& map, const Point& q, const Point& v);

/// Action function f(p) = theta0 + int_eta (phi^*beta - beta), eta the radial
/// segment from the boundary to p. theta0 must differ from the map's
/// boundary angle by an integer.
double action_function(const DiskMap& map, double theta0, const Point& p, double quad_tol = kDefaultQuadTol);

/// The action function of (map, theta0) as an evaluable object. Closed forms
/// are used for rotations and single radial twists.
class ActionProfile {
public:
    ActionProfile(DiskMap map, double theta0, double quad_tol = kDefaultQuadTol);

    double operator()(const Point& p) const;
    /// Generic radial-path evaluator regardless of closed forms.
    double path_integral(const Point& p) const;

    const DiskMap& map() const { return map_; }
    double theta0() const { return theta0_; }
    double quad_tol() const { return quad_tol_; }
    bool has_closed_form() const;

private:
    DiskMap map_;
    double theta0_;
    double quad_tol_;
};

enum class CalabiMethod { Auto, PolarClosedForm, Adaptive2d };

struct CalabiResult {
    double value = 0.0;
    double quad_error_estimate = 0.0;
    CalabiMethod method = CalabiMethod::PolarClosedForm;
};

std::string to_string(CalabiMethod m);

/// Calabi invariant: integral of the action function against the area form
/// of total mass 1. Radially symmetric maps integrate f(r) 2r dr; others use
/// nested adaptive quadrature over (theta, rho) of rho^2 (phi^*beta - beta)(d_r),
/// which equals theta0 minus the Calabi invariant after exchanging the
/// radial integrals.
CalabiResult calabi(const DiskMap& map, double theta0, double quad_tol = kDefaultQuadTol,
                    CalabiMethod method = CalabiMethod::Auto);

struct AreaReport {
    double max_defect = 0.0;
    bool pass = false;
};

/// max |det D phi - 1| over quasi-random points of the disk.
AreaReport verify_area_preservation(const DiskMap& map, int n_samples, double tol);

/// Throws DomainError unless theta0 - map.boundary_angle() is an integer.
void check_boundary_angle(const DiskMap& map, double theta0);

}  // namespace calabi::diskmap
