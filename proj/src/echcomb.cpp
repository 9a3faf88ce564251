#include "calabi/echcomb.hpp"

#include "calabi/errors.hpp"
#include "calabi/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace calabi::echcomb {

namespace {

bool heap_after(const NkTerm& x, const NkTerm& y) {
    if (x.value != y.value) return x.value > y.value;
    if (x.m != y.m) return x.m > y.m;
    return x.n > y.n;
}

void require_positive(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw PreconditionError("a and b must be positive and finite");
}

/// floor with a relative guard, so values that are integers up to rounding
/// are not pushed down by one.
std::int64_t guarded_floor(double v) {
    return static_cast<std::int64_t>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
}

bool near_integer(double x, double eps) { return std::abs(x - std::round(x)) < eps; }

void check_resonance(double x, double eps, const std::string& what) {
    if (near_integer(x, eps))
        throw PrecisionError(what + " = " + fmt15(x) + " lies within eps_res = " + fmt15(eps) +
                             " of an integer; supply parameters with more margin from resonance");
}

std::int64_t floor_ceil_sum(double theta, std::int64_t mult, double eps, const std::string& tag) {
    std::int64_t s = 0;
    for (std::int64_t k = 1; k <= mult; ++k) {
        const double x = static_cast<double>(k) * theta;
        check_resonance(x, eps, tag + ": " + std::to_string(k) + " * theta");
        const auto f = static_cast<std::int64_t>(std::floor(x));
        s += 2 * f + 1;
    }
    return s;
}

LowerBoundReport lower_bound_from(const std::vector<NkTerm>& seq, double a, double b) {
    LowerBoundReport rep;
    for (std::size_t k = 1; k < seq.size(); ++k) {
        const double d = 2.0 * a * b * static_cast<double>(k) - seq[k].value * seq[k].value;
        const double c = d / std::sqrt(static_cast<double>(k));
        if (d > rep.max_defect) rep.max_defect = d;
        if (c > rep.c_witness) {
            rep.c_witness = c;
            rep.worst_k = k;
        }
    }
    rep.pass = true;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double lhs = seq[k].value * seq[k].value;
        const double rhs = 2.0 * a * b * kk - rep.c_witness * std::sqrt(kk);
        if (lhs < rhs - 1e-12 * std::max(1.0, std::abs(rhs))) rep.pass = false;
    }
    return rep;
}

bool k_admissible(double theta0, double V, double eps, double k, double c) {
    return 2.0 * k * (V + eps) <= 2.0 * k * theta0 - c * theta0 * theta0 * std::sqrt(k);
}

}  // namespace

// ---------------------------------------------------------------- N_k

NkGenerator::NkGenerator(double a, double b) : a_(a), b_(b) {
    require_positive(a, b);
    heap_.push_back({0.0, 0, 0});
}

NkTerm NkGenerator::next() {
    std::pop_heap(heap_.begin(), heap_.end(), heap_after);
    const NkTerm t = heap_.back();
    heap_.pop_back();
    auto push = [&](std::int64_t m, std::int64_t n) {
        heap_.push_back({a_ * static_cast<double>(m) + b_ * static_cast<double>(n), m, n});
        std::push_heap(heap_.begin(), heap_.end(), heap_after);
    };
    push(t.m + 1, t.n);
    if (t.m == 0) push(0, t.n + 1);
    ++index_;
    return t;
}

std::vector<NkTerm> nk_sequence(double a, double b, std::size_t k_max, std::size_t budget) {
    if (k_max > budget)
        throw ResourceError("k = " + std::to_string(k_max) + " exceeds the N_k budget of " + std::to_string(budget));
    NkGenerator g(a, b);
    std::vector<NkTerm> out;
    out.reserve(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) out.push_back(g.next());
    return out;
}

double nk(double a, double b, std::size_t k, std::size_t budget) {
    if (k > budget)
        throw ResourceError("k = " + std::to_string(k) + " exceeds the N_k budget of " + std::to_string(budget));
    NkGenerator g(a, b);
    NkTerm t;
    for (std::size_t i = 0; i <= k; ++i) t = g.next();
    return t.value;
}

// ---------------------------------------------------------------- lattice points

std::int64_t lattice_count_enumerate(double a, double b, double L) {
    require_positive(a, b);
    if (L < 0.0) return 0;
    const std::int64_t x_max = guarded_floor(L / a);
    std::int64_t count = 0;
    for (std::int64_t x = 0; x <= x_max; ++x) {
        const double rest = (L - a * static_cast<double>(x)) / b;
        const std::int64_t y = guarded_floor(rest);
        if (y >= 0) count += y + 1;
    }
    return count;
}

std::int64_t lattice_count_identity(double a, double b, std::int64_t m, std::int64_t n) {
    require_positive(a, b);
    if (m < 0 || n < 0) throw PreconditionError("multiplicities must be nonnegative");
    std::int64_t s = (m + 1) * (n + 1);
    for (std::int64_t i = 1; i <= m; ++i) s += guarded_floor(a * static_cast<double>(i) / b);
    for (std::int64_t j = 1; j <= n; ++j) s += guarded_floor(b * static_cast<double>(j) / a);
    return s;
}

std::int64_t lattice_count(double a, double b, double L, std::optional<std::pair<std::int64_t, std::int64_t>> rep) {
    const std::int64_t e = lattice_count_enumerate(a, b, L);
    if (rep) {
        const auto [m, n] = *rep;
        const double Lr = a * static_cast<double>(m) + b * static_cast<double>(n);
        if (std::abs(Lr - L) > 1e-9 * std::max(1.0, std::abs(L)))
            throw PreconditionError("L is not a m + b n for the supplied representation");
        const std::int64_t id = lattice_count_identity(a, b, m, n);
        if (id != e)
            throw ConsistencyError("lattice identity gives " + std::to_string(id) + " but enumeration gives " +
                                   std::to_string(e) + "; the input is too close to a resonance");
    }
    return e;
}

LowerBoundReport nk_lower_bound(double a, double b, std::size_t k_max) {
    if (k_max < 1) throw PreconditionError("k_max must be >= 1");
    return lower_bound_from(nk_sequence(a, b, k_max), a, b);
}

// ---------------------------------------------------------------- gradings

std::int64_t grading_ellipsoid(const EllipsoidOrbitSet& s, double eps_res) {
    require_positive(s.a, s.b);
    if (s.m < 0 || s.n < 0) throw PreconditionError("multiplicities must be nonnegative");
    std::int64_t sum = (s.m + 1) * (s.n + 1) - 1;
    for (std::int64_t i = 1; i <= s.m; ++i) {
        const double x = static_cast<double>(i) * s.a / s.b;
        check_resonance(x, eps_res, std::to_string(i) + " a/b");
        sum += static_cast<std::int64_t>(std::floor(x));
    }
    for (std::int64_t j = 1; j <= s.n; ++j) {
        const double x = static_cast<double>(j) * s.b / s.a;
        check_resonance(x, eps_res, std::to_string(j) + " b/a");
        sum += static_cast<std::int64_t>(std::floor(x));
    }
    return 2 * sum;
}

std::int64_t grading_general(const std::vector<GeneralOrbitDatum>& orbits,
                             const std::vector<std::vector<std::int64_t>>& linking, double eps_res) {
    const std::size_t N = orbits.size();
    if (N > 1 || !linking.empty()) {
        if (linking.size() != N) throw PreconditionError("linking table must be square with one row per orbit");
        for (const auto& row : linking)
            if (row.size() != N) throw PreconditionError("linking table must be square with one row per orbit");
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                if (linking[i][j] != linking[j][i]) throw PreconditionError("linking table must be symmetric");
    }
    std::int64_t total = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& o = orbits[i];
        if (o.multiplicity < 1) throw PreconditionError("multiplicities must be >= 1");
        total -= o.multiplicity * o.self_linking;
        for (std::size_t j = 0; j < N; ++j)
            if (j != i) total += o.multiplicity * orbits[j].multiplicity * linking[i][j];
        total += floor_ceil_sum(o.rotation, o.multiplicity, eps_res, "orbit " + std::to_string(i));
    }
    return total;
}

// ---------------------------------------------------------------- spectrum

std::vector<SpectrumEntry> ech_spectrum_ellipsoid(double a, double b, std::size_t k_max, double eps_res) {
    const auto seq = nk_sequence(a, b, k_max);
    std::vector<SpectrumEntry> out;
    out.reserve(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        const auto& t = seq[k];
        const auto g = grading_ellipsoid({t.m, t.n, a, b}, eps_res);
        if (g != 2 * static_cast<std::int64_t>(k))
            throw ConsistencyError("generator " + std::to_string(k) + " has grading " + std::to_string(g));
        out.push_back({k, t.value, t.m, t.n, g});
    }
    return out;
}

std::vector<SpectrumEntry> nk_table(double a, double b, std::size_t k_max, double eps_res) {
    const auto seq = nk_sequence(a, b, k_max);
    std::vector<SpectrumEntry> out;
    out.reserve(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        SpectrumEntry e{k, seq[k].value, seq[k].m, seq[k].n, std::nullopt};
        try {
            e.grading = grading_ellipsoid({seq[k].m, seq[k].n, a, b}, eps_res);
        } catch (const PrecisionError&) {
        }
        out.push_back(e);
    }
    return out;
}

VolumeReport volume_asymptotic_check(double a, double b, const std::vector<std::size_t>& k_list) {
    if (k_list.empty()) throw PreconditionError("k_list must be nonempty");
    if (*std::min_element(k_list.begin(), k_list.end()) < 1) throw PreconditionError("k must be >= 1");
    const std::size_t k_max = *std::max_element(k_list.begin(), k_list.end());
    const auto seq = nk_sequence(a, b, k_max);
    const auto lb = lower_bound_from(seq, a, b);

    VolumeReport rep;
    rep.volume = a * b;
    rep.c_witness = lb.c_witness;
    rep.pass = true;
    for (std::size_t k : k_list) {
        const double kk = static_cast<double>(k);
        const double ratio = seq[k].value * seq[k].value / (2.0 * kk);
        const double bound = lb.c_witness * std::sqrt(kk) / (2.0 * kk) + 1e-12 * std::max(1.0, rep.volume);
        rep.ks.push_back(k);
        rep.ratios.push_back(ratio);
        if (std::abs(ratio - rep.volume) > bound) rep.pass = false;
        if (k == k_max) {
            rep.limit_defect = std::abs(ratio - rep.volume);
            rep.bound = bound;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- filtration

double knot_filtration(double theta0, std::int64_t m, std::int64_t linking) {
    if (!(theta0 > 0.0)) throw PreconditionError("theta0 must be positive");
    if (m < 0) throw PreconditionError("binding multiplicity must be nonnegative");
    return static_cast<double>(m) * theta0 + static_cast<double>(linking);
}

double ellipsoid_filtration(double a, double b, std::int64_t d, std::int64_t m) {
    require_positive(a, b);
    return knot_filtration(b / a, m, d);
}

int filtered_rank(std::size_t k, double R, double theta0, double eps_res) {
    if (!(theta0 > 0.0)) throw PreconditionError("theta0 must be positive");
    NkGenerator g(1.0, theta0);
    NkTerm t;
    for (std::size_t i = 0; i <= k; ++i) t = g.next();
    // The realising generator must sit in grading 2k; this also applies the resonance guard.
    const auto grading = grading_ellipsoid({t.m, t.n, 1.0, theta0}, eps_res);
    if (grading != 2 * static_cast<std::int64_t>(k))
        throw ConsistencyError("generator of N_" + std::to_string(k) + " has grading " + std::to_string(grading));
    return R >= t.value ? 1 : 0;
}

int filtered_rank_by_grading(std::int64_t grading, double R, double theta0, double eps_res) {
    if (grading < 0 || grading % 2 != 0) return 0;
    return filtered_rank(static_cast<std::size_t>(grading / 2), R, theta0, eps_res);
}

// ---------------------------------------------------------------- bounds

bool InputBounds::satisfied_by(double action_alpha, double linking_alpha, std::int64_t m) const {
    const double md = static_cast<double>(m);
    return action_alpha + md <= action_bound * (1.0 + 1e-12) &&
           linking_alpha + md * rot_binding >= linking_bound * (1.0 - 1e-12);
}

InputBounds prop_input_bounds(std::size_t k, double theta0, double V, double eps, double c_k) {
    if (!(theta0 > 0.0) || !(V > 0.0) || !(eps > 0.0)) throw PreconditionError("theta0, V and eps must be positive");
    if (!(c_k >= 0.0)) throw PreconditionError("c_k must be nonnegative");
    if (k < 1) throw PreconditionError("k must be >= 1");
    InputBounds out;
    const double kk = static_cast<double>(k);
    out.action_bound = std::sqrt(2.0 * kk * (V + eps));
    out.rot_binding = 1.0 / theta0;
    out.linking_bound = nk(1.0, out.rot_binding, k);
    out.admissible = c_k * c_k / (2.0 * kk) <= (V + eps) * (1.0 + 1e-12);
    return out;
}

InputWitness extract_input_witness(double a, std::size_t k) {
    require_positive(a, 1.0);
    NkGenerator g(a, 1.0);
    NkTerm t;
    for (std::size_t i = 0; i <= k; ++i) t = g.next();
    InputWitness w;
    w.m = t.n;
    w.action_alpha = a * static_cast<double>(t.m);
    w.linking_alpha = static_cast<double>(t.m);
    w.c_k = t.value;
    return w;
}

double mean_action_ratio(double theta0, double V, double eps, std::size_t k, double c, double m) {
    const double kk = static_cast<double>(k);
    const double num = std::sqrt(2.0 * kk * (V + eps)) - m;
    const double inner = 2.0 * kk * theta0 - c * theta0 * theta0 * std::sqrt(kk);
    if (!(inner > 0.0) || !(std::sqrt(inner) - m > 0.0))
        throw DomainError("the linking lower bound is not positive for this k and m");
    return theta0 * num / (std::sqrt(inner) - m);
}

std::size_t minimal_admissible_k(double theta0, double V, double eps, double c) {
    if (!(V + eps < theta0)) throw PreconditionError("need V + eps < theta0");
    if (c <= 0.0) return 1;
    const double root = c * theta0 * theta0 / (2.0 * (theta0 - V - eps));
    auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(root * root)));
    while (k > 1 && k_admissible(theta0, V, eps, static_cast<double>(k - 1), c)) --k;
    while (!k_admissible(theta0, V, eps, static_cast<double>(k), c)) ++k;
    return k;
}

double mean_action_bound(double theta0, double V, double eps, std::size_t k, double c) {
    if (!(theta0 > 0.0) || !(eps > 0.0)) throw PreconditionError("theta0 and eps must be positive");
    if (!(V + eps < theta0)) throw PreconditionError("need V + eps < theta0");
    if (c < 0.0) throw PreconditionError("c must be nonnegative");
    const double kk = static_cast<double>(k);
    if (k < 1 || !k_admissible(theta0, V, eps, kk, c))
        throw DomainError("k = " + std::to_string(k) + " violates 2k(V+eps) <= 2k theta0 - c theta0^2 sqrt(k); " +
                          "minimal admissible k = " + std::to_string(minimal_admissible_k(theta0, V, eps, c)));
    return std::sqrt(2.0 * kk * (V + eps) / (2.0 * kk / theta0 - c * std::sqrt(kk)));
}

double mean_action_limit(double theta0, double V, double eps) { return std::sqrt(theta0 * (V + eps)); }

std::string spectrum_csv(const std::vector<SpectrumEntry>& rows) {
    std::ostringstream os;
    os << "k,N_k,m,n,grading,c_k^2/2k\n";
    for (const auto& r : rows) {
        os << r.k << ',' << fmt15(r.c_k) << ',' << r.m << ',' << r.n << ',';
        if (r.grading) os << *r.grading;
        os << ',';
        if (r.k > 0) os << fmt15(r.c_k * r.c_k / (2.0 * static_cast<double>(r.k)));
        os << '\n';
    }
    return os.str();
}

}  // namespace calabi::echcomb
