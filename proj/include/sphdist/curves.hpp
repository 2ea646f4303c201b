#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "scalar_search.hpp"

namespace sphdist {

/// Parameter interval [t_i, t_f] with t_f > t_i.
struct CurveDomain {
    double t_i = 0.0;
    double t_f = 1.0;

    static CurveDomain make(double t_i, double t_f) {
        require(std::isfinite(t_i) && std::isfinite(t_f) && t_f > t_i, "CurveDomain: need t_f > t_i");
        return {t_i, t_f};
    }
    double length() const { return t_f - t_i; }
    /// Maps t into [t_i, t_f) by whole multiples of the domain length.
    double wrap(double t) const {
        const double u = t_i + std::fmod(t - t_i, length());
        return u < t_i ? u + length() : u;
    }
    friend bool operator==(const CurveDomain&, const CurveDomain&) = default;
};

/// r(t) = (sin 2πt, 0, cos 2πt); one circuit per unit of t.
struct GreatCircle {};

/// Two-lobed seam:
///   theta(t) = π/2 - (π/2 - A) cos t,   phi(t) = t/2 + A sin 2t.
/// phi needs 4π of parameter for one full turn, so the closed single
/// traversal lives on [0, 4π].
struct TennisBallSeam {
    double A = 0.7037;
};

/// theta(t) = 3π/4 + B sin 10t, phi(t) = t, on [0, 2π].
struct WavyCircle {
    double B = 0.1856;
};

/// General search family
///   theta(t) = theta_center + scale * sum_j (a_j cos jt + b_j sin jt)
///   phi(t)   = phi_rate * t + scale * sum_j c_j sin jt
/// with j = 1..J. The seam is the member a_1 = -(π/2 - A), c_2 = A.
struct TrigSeries {
    double theta_center = half_pi;
    double phi_rate = 0.5;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;
    double scale = 1.0;

    std::size_t order() const { return std::max({a.size(), b.size(), c.size()}); }
};

using CurveFamily = std::variant<GreatCircle, TennisBallSeam, WavyCircle, TrigSeries>;

inline std::string family_name(const CurveFamily& f) {
    struct Visitor {
        std::string operator()(const GreatCircle&) const { return "great_circle"; }
        std::string operator()(const TennisBallSeam&) const { return "tennis_ball"; }
        std::string operator()(const WavyCircle&) const { return "wavy_circle"; }
        std::string operator()(const TrigSeries&) const { return "trig_series"; }
    };
    return std::visit(Visitor{}, f);
}

/// Period of the family's angle functions in t (after which r repeats).
inline double natural_period(const CurveFamily& f) {
    struct Visitor {
        double operator()(const GreatCircle&) const { return 1.0; }
        double operator()(const TennisBallSeam&) const { return 2.0 * two_pi; }
        double operator()(const WavyCircle&) const { return two_pi; }
        double operator()(const TrigSeries& s) const {
            if (s.phi_rate == 0.0) return two_pi;
            return std::max(two_pi, two_pi / std::abs(s.phi_rate));
        }
    };
    return std::visit(Visitor{}, f);
}

/// Default domain: one closed traversal (two for the great circle, which is
/// how it reaches arc-length 4π).
inline CurveDomain natural_domain(const CurveFamily& f) {
    if (std::holds_alternative<GreatCircle>(f)) return {0.0, 2.0};
    return {0.0, natural_period(f)};
}

inline void validate_family(const CurveFamily& f) {
    if (const auto* s = std::get_if<TennisBallSeam>(&f)) {
        require(s->A > 0.0 && s->A < half_pi, "TennisBallSeam: A must lie in (0, pi/2)");
    } else if (const auto* w = std::get_if<WavyCircle>(&f)) {
        require(w->B > 0.0 && w->B < 0.25 * pi, "WavyCircle: B must lie in (0, pi/4)");
    } else if (const auto* t = std::get_if<TrigSeries>(&f)) {
        require(std::isfinite(t->theta_center) && std::isfinite(t->phi_rate) && std::isfinite(t->scale),
                "TrigSeries: non-finite parameter");
        for (const auto* v : {&t->a, &t->b, &t->c})
            for (double x : *v) require(std::isfinite(x), "TrigSeries: non-finite coefficient");
    }
}

/// Colatitude and longitude of a family at parameter t.
inline std::pair<double, double> family_angles(const CurveFamily& f, double t) {
    struct Visitor {
        double t;
        std::pair<double, double> operator()(const GreatCircle&) const { return {two_pi * t, 0.0}; }
        std::pair<double, double> operator()(const TennisBallSeam& s) const {
            return {half_pi - (half_pi - s.A) * std::cos(t), 0.5 * t + s.A * std::sin(2.0 * t)};
        }
        std::pair<double, double> operator()(const WavyCircle& w) const {
            return {0.75 * pi + w.B * std::sin(10.0 * t), t};
        }
        std::pair<double, double> operator()(const TrigSeries& s) const {
            double theta = 0.0, phi = 0.0;
            for (std::size_t j = 0; j < s.order(); ++j) {
                const double jt = static_cast<double>(j + 1) * t;
                const double cj = std::cos(jt), sj = std::sin(jt);
                if (j < s.a.size()) theta += s.a[j] * cj;
                if (j < s.b.size()) theta += s.b[j] * sj;
                if (j < s.c.size()) phi += s.c[j] * sj;
            }
            return {s.theta_center + s.scale * theta, s.phi_rate * t + s.scale * phi};
        }
    };
    return std::visit(Visitor{t}, f);
}

/// A closed spherical curve: family shape, parameter domain and an optional
/// rigid rotation applied after evaluation. Immutable once built.
class SphericalCurve {
public:
    SphericalCurve(CurveFamily family, CurveDomain domain, std::optional<Rotation> rotation = std::nullopt)
        : family_(std::move(family)), domain_(CurveDomain::make(domain.t_i, domain.t_f)), rotation_(rotation) {
        validate_family(family_);
    }

    static SphericalCurve great_circle(CurveDomain d = {0.0, 2.0}) { return {GreatCircle{}, d}; }
    static SphericalCurve tennis_ball(double A = 0.7037) {
        return {TennisBallSeam{A}, natural_domain(TennisBallSeam{A})};
    }
    static SphericalCurve wavy_circle(double B = 0.1856) {
        return {WavyCircle{B}, natural_domain(WavyCircle{B})};
    }
    static SphericalCurve trig_series(TrigSeries s) {
        const CurveDomain d = natural_domain(s);
        return {std::move(s), d};
    }

    const CurveFamily& family() const { return family_; }
    const CurveDomain& domain() const { return domain_; }
    const std::optional<Rotation>& rotation() const { return rotation_; }

    SphericalCurve with_domain(CurveDomain d) const { return {family_, d, rotation_}; }

    /// Same curve rigidly rotated by r (composed after any existing rotation).
    SphericalCurve rotated(const Rotation& r) const {
        if (!rotation_) return {family_, domain_, r};
        Rotation composed;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += r.m[i][k] * rotation_->m[k][j];
                composed.m[i][j] = s;
            }
        return {family_, domain_, composed};
    }

    std::pair<double, double> angles(double t) const { return family_angles(family_, t); }

    UnitVector position(double t) const {
        const auto [theta, phi] = angles(t);
        const UnitVector u = spherical_to_cartesian(theta, phi);
        return rotation_ ? rotation_->apply(u) : u;
    }

    /// Five-point central difference with step h = (t_f - t_i) * 1e-6.
    /// The two-point form has O(h^2) error, which is visible at 1e-9 in
    /// arc-length once h scales with a doubled domain.
    Vec3 velocity(double t) const {
        const double h = domain_.length() * 1e-6;
        const Vec3 near = position(t + h) - position(t - h);
        const Vec3 far = position(t + 2.0 * h) - position(t - 2.0 * h);
        return (1.0 / (12.0 * h)) * (8.0 * near - far);
    }

    double speed(double t) const { return norm(velocity(t)); }

private:
    CurveFamily family_;
    CurveDomain domain_;
    std::optional<Rotation> rotation_;
};

inline UnitVector position(const SphericalCurve& c, double t) { return c.position(t); }
inline Vec3 velocity(const SphericalCurve& c, double t) { return c.velocity(t); }

/// Length of the curve over its domain, integral of |r'(t)| dt.
inline FunctionalResult arc_length(const SphericalCurve& c, const QuadratureRule& rule = QuadratureRule::curve_default()) {
    return integrate_1d([&](double t) { return c.speed(t); }, c.domain().t_i, c.domain().t_f, rule);
}

inline bool is_closed(const SphericalCurve& c, double eps = 1e-8) {
    require(eps > 0.0, "is_closed: eps must be positive");
    return norm(c.position(c.domain().t_i) - c.position(c.domain().t_f)) < eps;
}

struct SimplicityReport {
    bool simple = true;
    /// Parameters of a (near-)coincident pair when not simple.
    std::optional<std::pair<double, double>> witness;
    /// Smallest refined chordal distance among examined candidate pairs.
    double closest_approach = 0.0;
};

inline constexpr std::size_t kDefaultSimplicitySamples = 4096;
inline constexpr double kDefaultSimplicityEps = 1e-4;

namespace detail {

// Locally minimizes |r(s1) - r(s2)| with s1, s2 confined to their windows,
// by alternating golden-section sweeps.
inline std::pair<std::pair<double, double>, double> refine_close_pair(const SphericalCurve& c, double t1,
                                                                      double t2, double half_window) {
    double s1 = t1, s2 = t2;
    const double x_tol = half_window * 1e-9;
    double best = norm(c.position(s1) - c.position(s2));
    for (int sweep = 0; sweep < 12; ++sweep) {
        const UnitVector p2 = c.position(s2);
        s1 = golden_section_minimize([&](double s) { return norm(c.position(s) - p2); }, t1 - half_window,
                                     t1 + half_window, x_tol)
                 .x;
        const UnitVector p1 = c.position(s1);
        const auto g = golden_section_minimize([&](double s) { return norm(p1 - c.position(s)); },
                                               t2 - half_window, t2 + half_window, x_tol);
        s2 = g.x;
        const double previous = best;
        best = g.f_x;
        if (previous - best <= 1e-15) break;
    }
    return {{s1, s2}, best};
}

}  // namespace detail

/// Self-intersection test by sampling.
///
/// Pairs whose circular index separation exceeds 3 and whose chord is within
/// twice the largest sampling step are refined locally; the curve is flagged
/// non-simple when a refined chord drops below eps.
inline SimplicityReport is_simple(const SphericalCurve& c, std::size_t n_samples = kDefaultSimplicitySamples,
                                  double eps = kDefaultSimplicityEps) {
    require(n_samples >= 64, "is_simple: n_samples must be >= 64");
    require(eps > 0.0, "is_simple: eps must be positive");
    const double t0 = c.domain().t_i;
    const double step = c.domain().length() / static_cast<double>(n_samples);
    std::vector<Vec3> pts(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) pts[k] = c.position(t0 + static_cast<double>(k) * step);

    double max_chord = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k)
        max_chord = std::max(max_chord, norm(pts[(k + 1) % n_samples] - pts[k]));
    const double threshold = std::max(eps, 2.0 * max_chord);
    const double threshold_sq = threshold * threshold;

    SimplicityReport report;
    report.closest_approach = 2.0;
    double min_sq = 4.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (std::size_t j = i + 4; j < n_samples; ++j) {
            const std::size_t sep = std::min(j - i, n_samples - (j - i));
            if (sep <= 3) continue;
            const Vec3 d = pts[i] - pts[j];
            const double d_sq = dot(d, d);
            min_sq = std::min(min_sq, d_sq);
            if (d_sq >= threshold_sq) continue;
            // Refine only discrete local minima of the chord; a crossing always
            // leaves one, and neighbours inside the excluded band are ignored.
            bool local_min = true;
            using Step = std::pair<std::size_t, std::size_t>;
            const std::size_t back = n_samples - 1;
            for (const auto& [di, dj] : {Step{1, 0}, Step{back, 0}, Step{0, 1}, Step{0, back}}) {
                const std::size_t a = (i + di) % n_samples, b = (j + dj) % n_samples;
                const std::size_t gap = a > b ? a - b : b - a;
                if (std::min(gap, n_samples - gap) <= 3) continue;
                const Vec3 e = pts[a] - pts[b];
                if (dot(e, e) < d_sq) {
                    local_min = false;
                    break;
                }
            }
            if (!local_min) continue;
            const double ti = t0 + static_cast<double>(i) * step;
            const double tj = t0 + static_cast<double>(j) * step;
            const auto [pair, dist] = detail::refine_close_pair(c, ti, tj, 1.5 * step);
            report.closest_approach = std::min(report.closest_approach, dist);
            if (dist < eps) {
                report.simple = false;
                report.witness = {c.domain().wrap(pair.first), c.domain().wrap(pair.second)};
                return report;
            }
        }
    }
    report.closest_approach = std::min(report.closest_approach, std::sqrt(min_sq));
    return report;
}

}  // namespace sphdist
