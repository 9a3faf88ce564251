#include "calabi/quadrature.hpp"

#include "calabi/errors.hpp"
#include "calabi/report.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace calabi::quad {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel apply_rule(const std::function<double(double)>& f, double a, double b, std::size_t& evals) {
    const auto& xk = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);

    const double fc = f(mid);
    double kron = fc * wk[0], gauss = 0.0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double dx = half * xk[i];
        const double s = f(mid - dx) + f(mid + dx);
        kron += wk[i] * s;
        if (i % 2 == 1) gauss += wg[i / 2] * s;
    }
    evals += 2 * xk.size() - 1;
    kron *= half;
    gauss *= half;
    const double err = std::max(std::abs(kron - gauss), 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kron));
    return {a, b, kron, err};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt,
                 std::span<const double> cuts) {
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, opt, cuts);
        r.value = -r.value;
        return r;
    }
    std::vector<double> edges{a};
    for (double c : cuts)
        if (c > a && c < b) edges.push_back(c);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    Result res;
    std::priority_queue<Panel> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] - edges[i] <= 0.0) continue;
        auto p = apply_rule(f, edges[i], edges[i + 1], res.evaluations);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    while (total_err > opt.abs_tol) {
        if (heap.size() >= opt.max_intervals) {
            throw NumericError("adaptive quadrature did not reach tolerance " + fmt15(opt.abs_tol) +
                                   " (estimated error " + fmt15(total_err) + ")",
                               total, total_err);
        }
        const Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) {
            // Panel cannot be refined further in double precision.
            throw NumericError("adaptive quadrature exhausted floating-point resolution", total, total_err);
        }
        const auto l = apply_rule(f, worst.a, m, res.evaluations);
        const auto r = apply_rule(f, m, worst.b, res.evaluations);
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // Resum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    res.value = total;
    res.error = total_err;
    return res;
}

Result integrate_2d(const std::function<double(double, double)>& f, const Options& opt,
                    std::span<const double> outer_cuts, std::span<const double> inner_cuts) {
    Options inner = opt;
    inner.abs_tol = 0.1 * opt.abs_tol;
    double inner_err = 0.0;
    std::size_t inner_evals = 0;
    auto outer = integrate(
        [&](double x) {
            auto r = integrate([&](double y) { return f(x, y); }, 0.0, 1.0, inner, inner_cuts);
            inner_err = std::max(inner_err, r.error);
            inner_evals += r.evaluations;
            return r.value;
        },
        0.0, 1.0, opt, outer_cuts);
    outer.error += inner_err;
    outer.evaluations = inner_evals;
    return outer;
}

}  // namespace calabi::quad
