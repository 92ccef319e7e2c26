#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace malab {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule, nodes ascending. Computed by Newton iteration on P_n.
GaussRule gauss_legendre(std::size_t n);

/// Integral of `fn` over [lo, hi] with a cached 24-point rule on each of the
/// sub-intervals delimited by `breaks` (which may be empty or unsorted; points
/// outside (lo, hi) are ignored).
template <class Fn>
double integrate_piecewise(Fn&& fn, double lo, double hi, std::span<const double> breaks);

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
template <class Fn>
double adaptive_simpson(Fn&& fn, double lo, double hi, double tol, int max_depth = 40);

// ---------------------------------------------------------------------------

const GaussRule& gauss24();

template <class Fn>
double integrate_piecewise(Fn&& fn, double lo, double hi, std::span<const double> breaks) {
    std::vector<double> cuts{lo};
    for (double b : breaks) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    const GaussRule& rule = gauss24();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        const double half = 0.5 * (cuts[k + 1] - cuts[k]);
        if (half <= 0.0) continue;
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            sum += rule.weights[q] * fn(mid + half * rule.nodes[q]);
        }
        total += half * sum;
    }
    return total;
}

namespace detail {
template <class Fn>
double simpson_step(Fn& fn, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <class Fn>
double adaptive_simpson(Fn&& fn, double lo, double hi, double tol, int max_depth) {
    const double fa = fn(lo);
    const double fb = fn(hi);
    const double fm = fn(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(fn, lo, hi, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace malab
