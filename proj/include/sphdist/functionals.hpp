#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <tuple>
#include <vector>

#include "curves.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "scalar_search.hpp"

namespace sphdist {

/// Mean geodesic distance from q to the whole sphere, (1/4π) ∬ dist(q, P) dS.
/// Equals π/2 for every q.
inline FunctionalResult mean_point_to_sphere(const UnitVector& q,
                                             const QuadratureRule& rule = QuadratureRule::sphere_default()) {
    require(std::abs(norm(q) - 1.0) <= kUnitNormTolerance, "mean_point_to_sphere: q is not unit length");
    FunctionalResult r = sphere_integrate([&](const UnitVector& p) { return detail::arc_between(q, p); }, rule);
    r.value /= 4.0 * pi;
    r.error_estimate /= 4.0 * pi;
    return r;
}

/// ∫_0^{2π} ∫_0^π sin θ · arcsin(D sin θ + E cos θ) dθ dφ with q = (A, B, E)
/// and D = A cos φ + B sin φ.
///
/// Summed as a whole this vanishes for every unit q (the integrand is odd
/// under P -> -P). Expanding arcsin in its power series does not give
/// vanishing φ-integrals term by term: ∫ D^k dφ > 0 for even k. Only the
/// aggregate is checked here.
inline FunctionalResult arcsin_identity_residual(const UnitVector& q,
                                                 const QuadratureRule& rule = QuadratureRule::sphere_default()) {
    require(std::abs(norm(q) - 1.0) <= kUnitNormTolerance, "arcsin_identity_residual: q is not unit length");
    const double A = q.x, B = q.y, E = q.z;
    return sphere_integrate(
        [=](const SpherePoint& p) {
            const double D = A * std::cos(p.phi) + B * std::sin(p.phi);
            return std::asin(std::clamp(D * std::sin(p.theta) + E * std::cos(p.theta), -1.0, 1.0));
        },
        rule);
}

/// M = ∫_C (π/2) ds = (π/2) · arc_length(c).
inline FunctionalResult curve_to_sphere_mean_M(const SphericalCurve& c,
                                               const QuadratureRule& rule = QuadratureRule::curve_default()) {
    require(is_closed(c, 1e-6), "curve_to_sphere_mean_M: curve is not closed");
    FunctionalResult r = arc_length(c, rule);
    r.value *= half_pi;
    r.error_estimate *= half_pi;
    return r;
}

struct PointToCurveOptions {
    /// Weight by |r'(t)| instead of the plain parameter mean.
    bool arc_length_weighted = false;
};

/// S̃(P): mean over the parameter domain of dist(P, r(t)),
/// (1 / (t_f - t_i)) ∫ dist(P, r(t)) dt.
inline FunctionalResult point_to_curve_mean(const SphericalCurve& c, const UnitVector& p,
                                            const QuadratureRule& rule = QuadratureRule::curve_default(),
                                            PointToCurveOptions options = {}) {
    const auto& d = c.domain();
    if (!options.arc_length_weighted) {
        FunctionalResult r =
            integrate_1d([&](double t) { return detail::arc_between(p, c.position(t)); }, d.t_i, d.t_f, rule);
        r.value /= d.length();
        r.error_estimate /= d.length();
        return r;
    }
    const FunctionalResult num = integrate_1d(
        [&](double t) { return detail::arc_between(p, c.position(t)) * c.speed(t); }, d.t_i, d.t_f, rule);
    const FunctionalResult den = arc_length(c, rule);
    require(den.value > 0.0, "point_to_curve_mean: zero arc-length curve cannot be arc-length weighted");
    const double value = num.value / den.value;
    const double err = num.error_estimate / den.value + std::abs(value) * den.error_estimate / den.value;
    return FunctionalResult{value, err, num.nodes_used + den.nodes_used, num.converged && den.converged};
}

inline FunctionalResult point_to_curve_mean(const SphericalCurve& c, const SpherePoint& p,
                                            const QuadratureRule& rule = QuadratureRule::curve_default(),
                                            PointToCurveOptions options = {}) {
    return point_to_curve_mean(c, spherical_to_cartesian(p), rule, options);
}

/// ∬_S S̃(P) dS and its normalized form ∬_S S̃ dS / (4π).
struct SurfaceMean {
    FunctionalResult total;
    FunctionalResult normalized;
};

inline constexpr std::size_t kInnerTrapezoidCap = std::size_t{1} << 14;

namespace detail {

// Trapezoid levels for S̃ over positions cached on the finest grid, so each
// sphere node costs only dot products and arc evaluations.
class CachedCurveMean {
public:
    CachedCurveMean(const SphericalCurve& c, const QuadratureRule& rule)
        : n0_(rule.n), tol_(rule.tol), length_(c.domain().length()) {
        const std::size_t cap = std::min(rule.max_nodes == 0 ? kInnerTrapezoidCap : rule.max_nodes,
                                         kTrapezoidNodeCap);
        finest_ = n0_;
        while (finest_ * 2 <= cap) finest_ *= 2;
        finest_ = std::max(finest_, 2 * n0_);
        const double h = length_ / static_cast<double>(finest_);
        positions_.reserve(finest_ + 1);
        for (std::size_t k = 0; k <= finest_; ++k)
            positions_.push_back(c.position(c.domain().t_i + static_cast<double>(k) * h));
    }

    FunctionalResult operator()(const UnitVector& p) const {
        std::size_t n = n0_;
        std::size_t stride = finest_ / n;
        const double ends = 0.5 * (arc_between(p, positions_[0]) + arc_between(p, positions_[finest_]));
        double interior = 0.0;
        for (std::size_t k = 1; k < n; ++k) interior += arc_between(p, positions_[k * stride]);
        std::size_t evaluations = n + 1;
        double coarse = (ends + interior) / static_cast<double>(n);
        while (true) {
            double mid = 0.0;
            const std::size_t half = stride / 2;
            for (std::size_t k = 0; k < n; ++k) mid += arc_between(p, positions_[k * stride + half]);
            evaluations += n;
            interior += mid;
            n *= 2;
            stride = half;
            const double fine = (ends + interior) / static_cast<double>(n);
            const double err = std::max(std::abs(fine - coarse), roundoff_floor(fine));
            if (err <= tol_ / length_ || stride < 2) {
                return FunctionalResult{fine, err, evaluations, err <= tol_ / length_};
            }
            coarse = fine;
        }
    }

private:
    std::size_t n0_;
    double tol_;
    double length_;
    std::size_t finest_ = 0;
    std::vector<UnitVector> positions_;
};

// ∬ of an integrand that reports its own error; product rule or Monte Carlo.
template <class G>
FunctionalResult sphere_integrate_with_inner_error(const G& g, const QuadratureRule& rule) {
    rule.validate();
    auto once = [&](const std::vector<double>& z_nodes, const std::vector<double>& z_weights, std::size_t n_phi,
                    const std::vector<SpherePoint>* samples) {
        const std::size_t rows = samples ? samples->size() : z_nodes.size();
        const std::size_t cols = samples ? 1 : n_phi;
        const double dphi = two_pi / static_cast<double>(cols);
        std::vector<double> value(rows), value_sq(rows), inner_err(rows);
        std::vector<char> ok(rows, 1);
        parallel_for(rows, [&](std::size_t i) {
            double s = 0.0, s2 = 0.0, e = 0.0;
            bool good = true;
            for (std::size_t j = 0; j < cols; ++j) {
                UnitVector p;
                if (samples) {
                    p = spherical_to_cartesian((*samples)[i]);
                } else {
                    const double z = z_nodes[i];
                    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                    const double phi = dphi * static_cast<double>(j);
                    p = UnitVector::unchecked(rho * std::cos(phi), rho * std::sin(phi), z);
                }
                const FunctionalResult r = g(p);
                checked(r.value, static_cast<double>(i));
                s += r.value;
                s2 += r.value * r.value;
                e += r.error_estimate;
                good = good && r.converged;
            }
            const double w = samples ? 1.0 : z_weights[i] * dphi;
            value[i] = w * s;
            value_sq[i] = s2;
            inner_err[i] = w * e;
            ok[i] = good;
        });
        double total = 0.0, total_sq = 0.0, err = 0.0;
        bool good = true;
        for (std::size_t i = 0; i < rows; ++i) {
            total += value[i];
            total_sq += value_sq[i];
            err += inner_err[i];
            good = good && ok[i];
        }
        return std::tuple{total, total_sq, err, good, rows * cols};
    };

    if (rule.kind == RuleKind::monte_carlo) {
        const auto samples = uniform_sphere_sample(rule.seed, rule.n);
        auto [sum, sum_sq, inner, good, count] = once({}, {}, 0, &samples);
        const double dn = static_cast<double>(count);
        const double mean = sum / dn;
        const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
        const double area = 4.0 * pi;
        const double err = area * std::sqrt(var / dn) + area * inner / dn;
        return FunctionalResult{area * mean, err, count, good};
    }
    const std::size_t cap = cap_for(rule, kSphereThetaNodeCap);
    std::size_t n = std::max<std::size_t>(1, std::min(rule.n, cap / 2));
    auto level = [&](std::size_t n_theta) {
        const auto nodes = gauss_legendre_nodes(n_theta);
        return once(nodes->x, nodes->w, 2 * n_theta, nullptr);
    };
    auto [coarse, c_sq, c_inner, c_good, c_count] = level(n);
    std::size_t evaluations = c_count;
    while (true) {
        n *= 2;
        auto [fine, f_sq, f_inner, f_good, f_count] = level(n);
        evaluations += f_count;
        const double outer = std::max(std::abs(fine - coarse), roundoff_floor(std::abs(fine)));
        if (outer <= rule.tol || 2 * n > cap) {
            return FunctionalResult{fine, outer + f_inner, evaluations, outer <= rule.tol && f_good};
        }
        coarse = fine;
    }
}

}  // namespace detail

/// M̃ = ∬_S S̃(P) dS (unnormalized, as used for the 2π² target) and M̃ / 4π.
///
/// The inner S̃ uses the plain parameter mean. With a trapezoid curve rule the
/// curve is sampled once on the finest inner grid; other kinds evaluate
/// point_to_curve_mean per sphere node.
inline SurfaceMean sphere_to_curve_mean(const SphericalCurve& c,
                                        const QuadratureRule& sphere_rule = QuadratureRule::sphere_default(),
                                        const QuadratureRule& curve_rule = QuadratureRule::trapezoid(512, 1e-7)) {
    curve_rule.validate();
    FunctionalResult total;
    if (curve_rule.kind == RuleKind::periodic_trapezoid) {
        const detail::CachedCurveMean inner(c, curve_rule);
        total = detail::sphere_integrate_with_inner_error(inner, sphere_rule);
    } else {
        total = detail::sphere_integrate_with_inner_error(
            [&](const UnitVector& p) { return point_to_curve_mean(c, p, curve_rule); }, sphere_rule);
    }
    FunctionalResult normalized = total;
    normalized.value /= 4.0 * pi;
    normalized.error_estimate /= 4.0 * pi;
    return {total, normalized};
}

struct ClosestPoint {
    double distance = 0.0;
    double t = 0.0;
};

inline constexpr std::size_t kDefaultScanPoints = 4096;

/// Nearest-point search against one curve, reusable across many query
/// points: dense scan on a fixed grid, then golden-section refinement in the
/// winning bracket to a parameter tolerance of 1e-10.
class ClosestPointFinder {
public:
    ClosestPointFinder(const SphericalCurve& c, std::size_t n_scan = kDefaultScanPoints)
        : curve_(c), closed_(is_closed(c, 1e-8)) {
        require(n_scan >= 64, "point_to_curve_min: n_scan must be >= 64");
        const auto& d = c.domain();
        step_ = d.length() / static_cast<double>(n_scan);
        const std::size_t count = closed_ ? n_scan : n_scan + 1;
        scan_.reserve(count);
        for (std::size_t k = 0; k < count; ++k) scan_.push_back(c.position(d.t_i + static_cast<double>(k) * step_));
    }

    ClosestPoint operator()(const UnitVector& p) const {
        std::size_t best = 0;
        double best_dot = -2.0;
        for (std::size_t k = 0; k < scan_.size(); ++k) {
            const double d = dot(p, scan_[k]);
            if (d > best_dot) {
                best_dot = d;
                best = k;
            }
        }
        const auto& dom = curve_.domain();
        const double t_best = dom.t_i + static_cast<double>(best) * step_;
        double lo = t_best - step_, hi = t_best + step_;
        if (!closed_) {
            lo = std::max(lo, dom.t_i);
            hi = std::min(hi, dom.t_f);
        }
        const auto g = golden_section_minimize([&](double t) { return detail::arc_between(p, curve_.position(t)); },
                                               lo, hi, 1e-10);
        const double scan_dist = detail::arc_between(p, scan_[best]);
        if (scan_dist <= g.f_x) return {scan_dist, t_best};
        return {g.f_x, wrap(g.x)};
    }

private:
    double wrap(double t) const {
        if (!closed_) return t;
        const auto& d = curve_.domain();
        double r = std::fmod(t - d.t_i, d.length());
        if (r < 0.0) r += d.length();
        return d.t_i + r;
    }

    SphericalCurve curve_;
    bool closed_;
    double step_ = 0.0;
    std::vector<UnitVector> scan_;
};

/// Minimum arc-distance from p to the curve and a parameter attaining it.
inline ClosestPoint point_to_curve_min(const SphericalCurve& c, const UnitVector& p,
                                       std::size_t n_scan = kDefaultScanPoints) {
    return ClosestPointFinder(c, n_scan)(p);
}

inline ClosestPoint point_to_curve_min(const SphericalCurve& c, const SpherePoint& p,
                                       std::size_t n_scan = kDefaultScanPoints) {
    return point_to_curve_min(c, spherical_to_cartesian(p), n_scan);
}

/// Monte Carlo mean over area-uniform sphere points of the distance to the
/// nearest curve point; error_estimate is the standard error.
inline FunctionalResult mean_min_arc_distance(const SphericalCurve& c, std::size_t n_points, std::uint64_t seed,
                                              std::size_t n_scan = kDefaultScanPoints) {
    require(n_points >= 100, "mean_min_arc_distance: n_points must be >= 100");
    const ClosestPointFinder finder(c, n_scan);
    const auto points = to_cartesian(uniform_sphere_sample(seed, n_points));
    std::vector<double> d(points.size());
    detail::parallel_for(points.size(), [&](std::size_t i) { d[i] = finder(points[i]).distance; });
    double sum = 0.0;
    for (double v : d) sum += v;
    const double n = static_cast<double>(d.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    return FunctionalResult{mean, std::sqrt(ss / (n - 1.0) / n), d.size(), true};
}

/// Stationarity residuals of the distance Lagrangian in (θ, φ) for a fixed
/// sphere point P = (θ0, φ0):
///   res_theta = sin θ0 cos θ cos(φ0 - φ) - cos θ0 sin θ
///   res_phi   = sin θ0 sin θ sin(φ0 - φ)
struct ELResidual {
    double res_theta = 0.0;
    double res_phi = 0.0;
};

inline ELResidual el_residuals(double theta, double phi, const SpherePoint& p) {
    require(std::isfinite(theta) && std::isfinite(phi), "el_residuals: non-finite input");
    const double s0 = std::sin(p.theta), c0 = std::cos(p.theta);
    const double dphi = p.phi - phi;
    return {s0 * std::cos(theta) * std::cos(dphi) - c0 * std::sin(theta), s0 * std::sin(theta) * std::sin(dphi)};
}

inline constexpr std::size_t kDeviationDesignSize = 122;

/// Fixed near-uniform design used by the sup-deviation objective.
inline const std::vector<UnitVector>& deviation_design() {
    static const std::vector<UnitVector> design = to_cartesian(fibonacci_sphere(kDeviationDesignSize));
    return design;
}

struct DeviationReport {
    double sup_deviation = 0.0;
    double min_mean = 0.0;
    double max_mean = 0.0;
    UnitVector argmax;
};

/// max over the design of |S̃(P) - π/2|, plus the range of S̃ seen.
inline DeviationReport sup_deviation_from_half_pi(const SphericalCurve& c,
                                                  const QuadratureRule& rule = QuadratureRule::curve_default(),
                                                  const std::vector<UnitVector>& design = deviation_design()) {
    require(!design.empty(), "sup_deviation_from_half_pi: empty design");
    DeviationReport r;
    r.min_mean = std::numeric_limits<double>::infinity();
    r.max_mean = -std::numeric_limits<double>::infinity();
    for (const auto& p : design) {
        const double s = point_to_curve_mean(c, p, rule).value;
        r.min_mean = std::min(r.min_mean, s);
        r.max_mean = std::max(r.max_mean, s);
        const double dev = std::abs(s - half_pi);
        if (dev > r.sup_deviation) {
            r.sup_deviation = dev;
            r.argmax = p;
        }
    }
    return r;
}

}  // namespace sphdist
