#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "errors.hpp"

namespace sphdist {

struct BisectionResult {
    double root = 0.0;
    double f_root = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Bisection on a sign-changing bracket [lo, hi].
///
/// Stops when |f(mid)| <= f_tol or the bracket has collapsed to adjacent
/// doubles. Deterministic: the same inputs always take the same path.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, double f_tol, std::size_t max_iter = 200) {
    require(lo < hi, "bisect: need lo < hi");
    double f_lo = f(lo);
    const double f_hi = f(hi);
    require((f_lo <= 0.0) != (f_hi <= 0.0) || f_lo == 0.0 || f_hi == 0.0,
            "bisect: f does not change sign on the bracket");
    if (std::abs(f_lo) <= f_tol) return {lo, f_lo, 0, true};
    if (std::abs(f_hi) <= f_tol) return {hi, f_hi, 0, true};
    BisectionResult r;
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        const double mid = lo + 0.5 * (hi - lo);
        const double f_mid = f(mid);
        r.root = mid;
        r.f_root = f_mid;
        if (std::abs(f_mid) <= f_tol) {
            r.converged = true;
            return r;
        }
        if (mid <= lo || mid >= hi) return r;
        if ((f_mid <= 0.0) == (f_lo <= 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    r.iterations = max_iter;
    return r;
}

struct GoldenSectionResult {
    double x = 0.0;
    double f_x = 0.0;
    std::size_t evaluations = 0;
};

/// Golden-section minimization of a unimodal f on [a, b] to |b - a| <= x_tol.
template <class F>
GoldenSectionResult golden_section_minimize(F&& f, double a, double b, double x_tol) {
    require(a <= b, "golden_section_minimize: need a <= b");
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    std::size_t evals = 2;
    while (b - a > x_tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
        if (evals > 400) break;
    }
    return fc <= fd ? GoldenSectionResult{c, fc, evals} : GoldenSectionResult{d, fd, evals};
}

}  // namespace sphdist
