#pragma once

// Lattice combinatorics of ellipsoids: the sequence N_k(a, b), lattice point
// counts, ECH gradings and spectra, knot filtration values and the action /
// linking inequalities used to bound mean actions.

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace calabi::echcomb {

inline constexpr double kDefaultEpsRes = 1e-9;
inline constexpr std::size_t kDefaultNkBudget = 50'000'000;

struct NkTerm {
    double value = 0.0;
    std::int64_t m = 0;
    std::int64_t n = 0;
};

/// Lazily merged frontier over (m, n): yields a m + b n in nondecreasing
/// order, once per representation. A plain value type: copies advance
/// independently.
class NkGenerator {
public:
    NkGenerator(double a, double b);

    NkTerm next();
    /// Index of the term the next call to next() returns.
    std::size_t index() const { return index_; }
    double a() const { return a_; }
    double b() const { return b_; }

private:
    double a_, b_;
    std::vector<NkTerm> heap_;
    std::size_t index_ = 0;
};

/// N_k(a, b), 0-indexed. Throws ResourceError when k exceeds `budget`.
double nk(double a, double b, std::size_t k, std::size_t budget = kDefaultNkBudget);
/// Terms 0..k_max with their representations.
std::vector<NkTerm> nk_sequence(double a, double b, std::size_t k_max, std::size_t budget = kDefaultNkBudget);

/// Lattice points of the closed triangle {x, y >= 0, a x + b y <= L}.
std::int64_t lattice_count_enumerate(double a, double b, double L);
/// (m+1)(n+1) + sum_{i<=m} floor(a i / b) + sum_{j<=n} floor(b j / a), the count for L = a m + b n.
std::int64_t lattice_count_identity(double a, double b, std::int64_t m, std::int64_t n);
/// Enumerated count; when a representation L = a m + b n is supplied the
/// identity is evaluated too and a mismatch throws ConsistencyError.
std::int64_t lattice_count(double a, double b, double L,
                           std::optional<std::pair<std::int64_t, std::int64_t>> rep = std::nullopt);

struct LowerBoundReport {
    double c_witness = 0.0;   ///< max_{1<=k<=k_max} (2abk - N_k^2)/sqrt(k), clamped at 0
    std::size_t worst_k = 0;
    double max_defect = 0.0;  ///< max_k (2abk - N_k^2)
    bool pass = false;        ///< N_k^2 >= 2abk - c_witness sqrt(k) for every k <= k_max
};

LowerBoundReport nk_lower_bound(double a, double b, std::size_t k_max);

/// gamma_1^m gamma_2^n on the boundary of the ellipsoid E(a, b).
struct EllipsoidOrbitSet {
    std::int64_t m = 0;
    std::int64_t n = 0;
    double a = 1.0;
    double b = 1.0;
    double action() const { return a * static_cast<double>(m) + b * static_cast<double>(n); }
};

/// Throws PrecisionError if any i a/b (i <= m) or j b/a (j <= n) is within
/// eps_res of an integer.
std::int64_t grading_ellipsoid(const EllipsoidOrbitSet& s, double eps_res = kDefaultEpsRes);

struct GeneralOrbitDatum {
    int self_linking = -1;
    double rotation = 0.0;
    std::int64_t multiplicity = 1;
};

/// -sum m_i sl_i + sum_{i != j} m_i m_j l_ij + sum_i sum_{k<=m_i} (floor(k theta_i) + ceil(k theta_i)).
/// `linking` is a symmetric table indexed like `orbits` (diagonal ignored).
std::int64_t grading_general(const std::vector<GeneralOrbitDatum>& orbits,
                             const std::vector<std::vector<std::int64_t>>& linking,
                             double eps_res = kDefaultEpsRes);

struct SpectrumEntry {
    std::size_t k = 0;
    double c_k = 0.0;
    std::int64_t m = 0;
    std::int64_t n = 0;
    /// Absent when the generator sits on a resonance.
    std::optional<std::int64_t> grading;
};

/// c_k(E(a, b)) = N_k(a, b) for k = 0..k_max with the realising generator.
std::vector<SpectrumEntry> ech_spectrum_ellipsoid(double a, double b, std::size_t k_max,
                                                  double eps_res = kDefaultEpsRes);

struct VolumeReport {
    std::vector<std::size_t> ks;
    std::vector<double> ratios;   ///< c_k^2 / (2k)
    double volume = 0.0;          ///< ab
    double limit_defect = 0.0;    ///< |ratio - ab| at the largest k
    double c_witness = 0.0;
    double bound = 0.0;           ///< c_witness sqrt(k) / (2k) + slack at the largest k
    bool pass = false;            ///< every sampled k satisfies its bound
};

VolumeReport volume_asymptotic_check(double a, double b, const std::vector<std::size_t>& k_list);

/// m theta0 + l(alpha, B)
double knot_filtration(double theta0, std::int64_t m, std::int64_t linking);
/// Filtration by B = gamma_2 on E(a, b): rot(gamma_2) = b/a and l(gamma_1, gamma_2) = 1.
double ellipsoid_filtration(double a, double b, std::int64_t d, std::int64_t m);

/// Rank of the filtered group in grading 2k: 1 iff R >= N_k(1, theta0).
int filtered_rank(std::size_t k, double R, double theta0, double eps_res = kDefaultEpsRes);
/// Same, indexed by grading; odd gradings give 0.
int filtered_rank_by_grading(std::int64_t grading, double R, double theta0, double eps_res = kDefaultEpsRes);

struct InputBounds {
    double action_bound = 0.0;   ///< A(alpha) + m <= sqrt(2k(V + eps))
    double linking_bound = 0.0;  ///< l(alpha, B) + m / theta0 >= N_k(1, 1/theta0)
    double rot_binding = 0.0;    ///< 1/theta0
    bool admissible = false;     ///< c_k^2 / (2k) <= V + eps
    bool satisfied_by(double action_alpha, double linking_alpha, std::int64_t m) const;
};

InputBounds prop_input_bounds(std::size_t k, double theta0, double V, double eps, double c_k);

/// For the binding gamma_2 of E(a, 1) (action 1, rotation 1/a): the
/// generator realising c_k written as B^m alpha.
struct InputWitness {
    std::int64_t m = 0;
    double action_alpha = 0.0;
    double linking_alpha = 0.0;
    double c_k = 0.0;
};
InputWitness extract_input_witness(double a, std::size_t k);

/// Right-hand side of the A/l bound for a given binding multiplicity m.
double mean_action_ratio(double theta0, double V, double eps, std::size_t k, double c, double m);
/// Smallest k with 2k(V+eps) <= 2k theta0 - c theta0^2 sqrt(k).
std::size_t minimal_admissible_k(double theta0, double V, double eps, double c);
/// sqrt(2k(V+eps) / (2k/theta0 - c sqrt(k))). Throws PreconditionError when
/// V + eps >= theta0 and DomainError naming the minimal k when k is too small.
double mean_action_bound(double theta0, double V, double eps, std::size_t k, double c);
/// sqrt(theta0 (V + eps))
double mean_action_limit(double theta0, double V, double eps);

/// Rows 0..k_max of N_k(a, b); the grading is filled in where the resonance guard allows.
std::vector<SpectrumEntry> nk_table(double a, double b, std::size_t k_max, double eps_res = kDefaultEpsRes);

/// k,N_k,m,n,grading,c_k^2/2k (empty fields where undefined)
std::string spectrum_csv(const std::vector<SpectrumEntry>& rows);

}  // namespace calabi::echcomb
