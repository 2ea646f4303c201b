#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

namespace sphdist {

enum class RuleKind { periodic_trapezoid, gauss_legendre, monte_carlo };

inline constexpr std::size_t kTrapezoidNodeCap = std::size_t{1} << 20;
inline constexpr std::size_t kGaussLegendreNodeCap = std::size_t{1} << 14;
inline constexpr std::size_t kSphereThetaNodeCap = 2048;

/// Integration scheme descriptor.
///
/// For 1-D integrals `n` is the starting node count, doubled until the
/// estimated error drops below `tol` or the node cap is hit. On the sphere,
/// both deterministic kinds mean the product rule
/// Gauss-Legendre(n) in cos(theta) x trapezoid(2n) in phi; `monte_carlo`
/// uses `n` area-uniform samples drawn from `seed`.
struct QuadratureRule {
    RuleKind kind = RuleKind::periodic_trapezoid;
    std::size_t n = 512;
    double tol = 1e-10;
    std::uint64_t seed = 42;
    /// Optional tighter cap on refinement; 0 means the kind's default cap.
    std::size_t max_nodes = 0;

    void validate() const {
        require(n >= 2, "QuadratureRule: n must be >= 2");
        require(tol > 0.0 && std::isfinite(tol), "QuadratureRule: tol must be positive");
    }

    static QuadratureRule trapezoid(std::size_t n = 512, double tol = 1e-10) {
        return {RuleKind::periodic_trapezoid, n, tol, 42, 0};
    }
    static QuadratureRule gauss_legendre(std::size_t n = 128, double tol = 1e-10) {
        return {RuleKind::gauss_legendre, n, tol, 42, 0};
    }
    static QuadratureRule monte_carlo(std::size_t n, std::uint64_t seed = 42) {
        return {RuleKind::monte_carlo, n, 1e-8, seed, 0};
    }
    /// Default for curve-parameter integrals.
    static QuadratureRule curve_default() { return trapezoid(512, 1e-10); }
    /// Default for surface integrals: GL 128 x trapezoid 256.
    static QuadratureRule sphere_default() { return gauss_legendre(128, 1e-8); }
};

/// Value of an evaluated integral or functional.
struct FunctionalResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t nodes_used = 0;
    /// False when refinement stopped at the node cap before reaching tol.
    bool converged = true;
};

namespace detail {

// Round-off floor on the doubling estimate (same idea as QUADPACK's
// 50 * epmach * resabs term).
inline double roundoff_floor(double abs_integral) {
    return 50.0 * std::numeric_limits<double>::epsilon() * abs_integral;
}

template <class T>
inline double checked(T value, double where) {
    const double v = static_cast<double>(value);
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "integrand returned a non-finite value at " << where;
        throw NonFiniteIntegrand(msg.str());
    }
    return v;
}

inline std::size_t cap_for(const QuadratureRule& rule, std::size_t kind_cap) {
    return rule.max_nodes == 0 ? kind_cap : std::min(rule.max_nodes, kind_cap);
}

}  // namespace detail

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
struct GaussLegendreNodes {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

inline GaussLegendreNodes compute_gauss_legendre(std::size_t n) {
    GaussLegendreNodes r;
    r.x.assign(n, 0.0);
    r.w.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess for the i-th largest root.
        const double k = static_cast<double>(i) + 1.0;
        double z = std::cos(pi * (k - 0.25) / (dn + 0.5)) *
                   (1.0 - (dn - 1.0) / (8.0 * dn * dn * dn));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (std::size_t j = 2; j <= n; ++j) {
                const double dj = static_cast<double>(j);
                const double p2 = ((2.0 * dj - 1.0) * z * p1 - (dj - 1.0) * p0) / dj;
                p0 = p1;
                p1 = p2;
            }
            dp = dn * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        {
            // One more derivative evaluation at the converged root.
            double p0 = 1.0, p1 = z;
            for (std::size_t j = 2; j <= n; ++j) {
                const double dj = static_cast<double>(j);
                const double p2 = ((2.0 * dj - 1.0) * z * p1 - (dj - 1.0) * p0) / dj;
                p0 = p1;
                p1 = p2;
            }
            dp = dn * (z * p1 - p0) / (z * z - 1.0);
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.x[n - 1 - i] = z;
        r.x[i] = -z;
        r.w[n - 1 - i] = w;
        r.w[i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

}  // namespace detail

/// Cached per node count; safe to call from several threads.
inline std::shared_ptr<const GaussLegendreNodes> gauss_legendre_nodes(std::size_t n) {
    require(n >= 1, "gauss_legendre_nodes: n must be >= 1");
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const GaussLegendreNodes>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    auto nodes = std::make_shared<const GaussLegendreNodes>(detail::compute_gauss_legendre(n));
    std::lock_guard lock(mutex);
    return cache.emplace(n, std::move(nodes)).first->second;
}

namespace detail {

template <class F>
FunctionalResult trapezoid_1d(F& f, double a, double b, const QuadratureRule& rule) {
    const std::size_t cap = cap_for(rule, kTrapezoidNodeCap);
    std::size_t n = rule.n;
    double h = (b - a) / static_cast<double>(n);
    const double fa = checked(f(a), a), fb = checked(f(b), b);
    const double ends = 0.5 * (fa + fb);
    const double ends_abs = 0.5 * (std::abs(fa) + std::abs(fb));
    double interior = 0.0, interior_abs = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double t = a + static_cast<double>(k) * h;
        const double v = checked(f(t), t);
        interior += v;
        interior_abs += std::abs(v);
    }
    std::size_t evaluations = n + 1;
    double coarse = h * (ends + interior);
    while (true) {
        // Midpoints of the current panels turn the n-rule into the 2n-rule.
        double mid = 0.0, mid_abs = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = a + (static_cast<double>(k) + 0.5) * h;
            const double v = checked(f(t), t);
            mid += v;
            mid_abs += std::abs(v);
        }
        evaluations += n;
        interior += mid;
        interior_abs += mid_abs;
        n *= 2;
        h = (b - a) / static_cast<double>(n);
        const double fine = h * (ends + interior);
        const double floor = roundoff_floor(h * (ends_abs + interior_abs));
        const double err = std::max(std::abs(fine - coarse), floor);
        if (err <= rule.tol || 2 * n > cap) {
            return FunctionalResult{fine, err, evaluations, err <= rule.tol};
        }
        coarse = fine;
    }
}

template <class F>
std::pair<double, double> gauss_legendre_once(F& f, double a, double b, std::size_t n) {
    const auto nodes = gauss_legendre_nodes(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0, sum_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = mid + half * nodes->x[i];
        const double v = checked(f(t), t);
        sum += nodes->w[i] * v;
        sum_abs += nodes->w[i] * std::abs(v);
    }
    return {half * sum, half * sum_abs};
}

template <class F>
FunctionalResult gauss_legendre_1d(F& f, double a, double b, const QuadratureRule& rule) {
    const std::size_t cap = cap_for(rule, kGaussLegendreNodeCap);
    std::size_t n = std::max<std::size_t>(1, std::min(rule.n, cap / 2));
    auto [coarse, coarse_abs] = gauss_legendre_once(f, a, b, n);
    std::size_t evaluations = n;
    while (true) {
        n *= 2;
        auto [fine, fine_abs] = gauss_legendre_once(f, a, b, n);
        evaluations += n;
        const double err = std::max(std::abs(fine - coarse), roundoff_floor(fine_abs));
        if (err <= rule.tol || 2 * n > cap) {
            return FunctionalResult{fine, err, evaluations, err <= rule.tol};
        }
        coarse = fine;
    }
}

template <class F>
FunctionalResult monte_carlo_1d(F& f, double a, double b, const QuadratureRule& rule) {
    std::mt19937_64 rng(rule.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < rule.n; ++i) {
        const double t = a + (b - a) * unit(rng);
        const double v = checked(f(t), t);
        sum += v;
        sum_sq += v * v;
    }
    const double dn = static_cast<double>(rule.n);
    const double mean = sum / dn;
    const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
    const double err = (b - a) * std::sqrt(var / dn);
    return FunctionalResult{(b - a) * mean, err, rule.n, err <= rule.tol};
}

}  // namespace detail

/// Integrates f over [a, b].
///
/// The reported value is I(2n) and the error estimate |I(2n) - I(n)|
/// (floored at the round-off level). Throws NonFiniteIntegrand if f returns
/// NaN or Inf; a result with converged == false means the node cap was hit.
template <class F>
FunctionalResult integrate_1d(F&& f, double a, double b, const QuadratureRule& rule) {
    rule.validate();
    require(std::isfinite(a) && std::isfinite(b) && a < b, "integrate_1d: need finite a < b");
    switch (rule.kind) {
        case RuleKind::periodic_trapezoid: return detail::trapezoid_1d(f, a, b, rule);
        case RuleKind::gauss_legendre: return detail::gauss_legendre_1d(f, a, b, rule);
        case RuleKind::monte_carlo: return detail::monte_carlo_1d(f, a, b, rule);
    }
    throw ContractViolation("integrate_1d: unknown rule kind");
}

namespace detail {

template <class G>
double eval_on_sphere(G& g, double z, double phi) {
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    if constexpr (std::is_invocable_v<G&, const UnitVector&>) {
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return checked(g(UnitVector::unchecked(s * std::cos(phi), s * std::sin(phi), z)), theta);
    } else {
        return checked(g(SpherePoint{theta, phi}), theta);
    }
}

// Product rule GL(n_theta) in z = cos(theta) x trapezoid(2 n_theta) in phi.
template <class G>
std::pair<double, double> sphere_product_once(G& g, std::size_t n_theta) {
    const auto nodes = gauss_legendre_nodes(n_theta);
    const std::size_t n_phi = 2 * n_theta;
    const double dphi = two_pi / static_cast<double>(n_phi);
    std::vector<double> row(n_theta, 0.0), row_abs(n_theta, 0.0);
    parallel_for(n_theta, [&](std::size_t i) {
        double s = 0.0, sa = 0.0;
        for (std::size_t j = 0; j < n_phi; ++j) {
            const double v = eval_on_sphere(g, nodes->x[i], dphi * static_cast<double>(j));
            s += v;
            sa += std::abs(v);
        }
        row[i] = nodes->w[i] * dphi * s;
        row_abs[i] = nodes->w[i] * dphi * sa;
    });
    double total = 0.0, total_abs = 0.0;
    for (std::size_t i = 0; i < n_theta; ++i) {
        total += row[i];
        total_abs += row_abs[i];
    }
    return {total, total_abs};
}

}  // namespace detail

/// Surface integral of g over the unit sphere (area element included).
///
/// g may take either a `SpherePoint` or a `UnitVector`. Row evaluations may
/// run concurrently, so g must be free of observable side effects.
template <class G>
FunctionalResult sphere_integrate(G&& g, const QuadratureRule& rule) {
    rule.validate();
    if (rule.kind == RuleKind::monte_carlo) {
        const auto points = uniform_sphere_sample(rule.seed, rule.n);
        std::vector<double> values(points.size());
        detail::parallel_for(points.size(), [&](std::size_t i) {
            values[i] = detail::eval_on_sphere(g, std::cos(points[i].theta), points[i].phi);
        });
        double sum = 0.0;
        for (double v : values) sum += v;
        const double dn = static_cast<double>(values.size());
        const double mean = sum / dn;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double stderr_ = dn > 1.0 ? std::sqrt(ss / (dn - 1.0) / dn) : 0.0;
        const double area = 4.0 * pi;
        return FunctionalResult{area * mean, area * stderr_, values.size(), area * stderr_ <= rule.tol};
    }
    const std::size_t cap = detail::cap_for(rule, kSphereThetaNodeCap);
    std::size_t n = std::max<std::size_t>(1, std::min(rule.n, cap / 2));
    auto [coarse, coarse_abs] = detail::sphere_product_once(g, n);
    std::size_t evaluations = 2 * n * n;
    while (true) {
        n *= 2;
        auto [fine, fine_abs] = detail::sphere_product_once(g, n);
        evaluations += 2 * n * n;
        const double err = std::max(std::abs(fine - coarse), detail::roundoff_floor(fine_abs));
        if (err <= rule.tol || 2 * n > cap) {
            return FunctionalResult{fine, err, evaluations, err <= rule.tol};
        }
        coarse = fine;
    }
}

}  // namespace sphdist
