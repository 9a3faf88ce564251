#pragma once

// Contact form on the mapping torus of a disk map: the smoothing profile eta,
// the form lambda_0 = F dt + beta(t), its volume and Reeb return times, the
// binding data of the open book, and the twist near the boundary that moves
// the boundary angle to a new target.

#include "calabi/diskmap.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace calabi::suspension {

/// eta on [0, 1] with eta = 0 near 0, eta = t - 1 near 1 and
/// -eps < -depth * eps <= eta' <= 1. eta' is a C^1 piecewise cubic: a dip to
/// -depth * eps, a plateau, and a rise to 1.
class SmoothingProfile {
public:
    explicit SmoothingProfile(double eps, double depth = 0.9, double t_start = 0.1);

    double eta(double t) const;
    double deta(double t) const;
    double eps() const { return eps_; }
    double min_derivative() const { return -dip_; }
    /// Breakpoints of eta' in (0, 1).
    std::vector<double> knots() const { return {t0_, t0_ + h_, t3_, t3_ + h_}; }
    /// A time at which eta' = -depth * eps, and one at which eta' = 1.
    double dip_time() const { return 0.5 * (t0_ + h_ + t3_); }
    double top_time() const { return 0.5 * (t3_ + h_ + 1.0); }

private:
    double eps_, dip_, t0_, h_, t3_;
};

struct LambdaComponents {
    double dt = 0.0;      ///< F(t, x)
    double dr = 0.0;      ///< beta(t)(d/dr)
    double dtheta = 0.0;  ///< beta(t)(d/dtheta)
};

class Suspension {
public:
    Suspension(diskmap::ActionProfile f, SmoothingProfile profile, double f_min, double f_max);

    /// F(t, x) = (1 - eta'(t)) f(x) + eta'(t) f(phi(x))
    double F(double t, const Point& x) const;
    /// beta(t)_x(v) = beta_x(v) + (t - eta(t)) df_x(v) + eta(t) (phi^* df)_x(v)
    double beta_t(double t, const Point& x, const Point& v) const;
    LambdaComponents lambda0(double t, const Point& x) const;

    /// F with f(x) and f(phi(x)) supplied by the caller.
    double F_from(double t, double fx, double fphix) const;

    const diskmap::ActionProfile& action() const { return f_; }
    const diskmap::DiskMap& map() const { return f_.map(); }
    double theta0() const { return f_.theta0(); }
    const SmoothingProfile& profile() const { return profile_; }
    /// Sampled range of the action function used to validate the profile.
    double f_min() const { return f_min_; }
    double f_max() const { return f_max_; }

private:
    diskmap::ActionProfile f_;
    SmoothingProfile profile_;
    double f_min_, f_max_;
};

/// Throws PreconditionError when f <= 0 somewhere (with the integer-shift
/// hint) or when the profile's eps is not below min f / max f. Without a
/// profile, eps = 0.5 min f / max f.
Suspension build_suspension(const diskmap::DiskMap& map, double theta0,
                            std::optional<SmoothingProfile> profile = std::nullopt,
                            double quad_tol = diskmap::kDefaultQuadTol, int positivity_samples = 1024);

struct ContactReport {
    double min_F = 0.0;
    double argmin_t = 0.0;
    Point argmin_x = Point::Zero();
    bool pass = false;
};

/// Minimum of F over quasi-random disk points (and the origin), each paired
/// with a quasi-random time and the times where eta' is extremal.
ContactReport verify_contact(const Suspension& s, int n_samples);

/// int_0^1 F(t, x) dt
double return_time(const Suspension& s, const Point& x, double quad_tol = diskmap::kDefaultQuadTol);

/// int F dt ^ omega over [0, 1] x D^2.
double contact_volume(const Suspension& s, double quad_tol = diskmap::kDefaultQuadTol);

struct BindingData {
    double action = 1.0;
    double rotation = 0.0;
    bool elliptic = true;
};

/// Throws DomainError for theta0 = 0.
BindingData binding_data(double theta0);

struct SuspensionReport {
    double min_F = 0.0;
    double volume = 0.0;
    double calabi = 0.0;
    double max_return_time_defect = 0.0;
    int samples = 0;
};

SuspensionReport suspension_report(const Suspension& s, int n_samples, double quad_tol = diskmap::kDefaultQuadTol);
nlohmann::ordered_json report_json(const Suspension& s, const SuspensionReport& r);

/// Heat map of F over (t, r) as an SVG document. Radially symmetric maps only.
std::string heatmap_svg(const Suspension& s, int nt = 64, int nr = 64);

struct BoundaryTwistSpec {
    double delta = 0.1;
    double target = 0.0;
    /// Twist angle on [1 - delta, 1]. When absent, a C^1 monotone profile
    /// is used that is constant near both ends.
    std::optional<PiecewisePolynomial> psi;
};

struct BoundaryTwistResult {
    diskmap::DiskMap new_map;
    diskmap::ActionProfile f_hat;
    PiecewisePolynomial psi;
    double delta = 0.0;
    double start_angle = 0.0;   ///< local twist angle of the old map at 1 - delta
    double inner_shift = 0.0;   ///< closed form of f_hat - f on r <= 1 - delta
    double inner_defect = 0.0;  ///< max |f_hat - f| over sample points with r <= 1 - delta
    double calabi_old = 0.0;
    double calabi_new = 0.0;
    double calabi_defect = 0.0; ///< |calabi_new - calabi_old|
    /// start_angle lies between the target and theta0, so psi moves monotonically toward the target.
    bool toward_target = false;
    /// min of f_hat over sampled radii in [1 - delta, 1]
    double collar_min_action = 0.0;
};

/// Default psi: constant `from` near 1 - delta, constant `to` near 1, smoothstep between.
PiecewisePolynomial default_twist_angle(double delta, double from, double to);

/// Replaces the map on r >= 1 - delta by (r, theta + 2 pi psi(r)). The map
/// must act as a radial twist on that annulus (a rigid rotation in
/// particular); psi must start at the map's own angle at 1 - delta (shifted
/// by the integer theta0 - boundary angle) and end at `target`.
BoundaryTwistResult boundary_twist(const diskmap::DiskMap& map, double theta0, const BoundaryTwistSpec& spec,
                                   double quad_tol = diskmap::kDefaultQuadTol, int inner_samples = 64);

struct TwistSearch {
    std::vector<double> deltas_tried;
    std::optional<BoundaryTwistResult> result;
};

/// Halves delta from delta0 until the twist moves toward the target,
/// inner_defect < eps/3 and calabi_defect < eps/2.
TwistSearch find_boundary_twist(const diskmap::DiskMap& map, double theta0, double target, double eps,
                                double delta0 = 0.5, int max_halvings = 30,
                                double quad_tol = diskmap::kDefaultQuadTol);

nlohmann::ordered_json twist_json(const BoundaryTwistResult& r, double eps);

}  // namespace calabi::suspension
