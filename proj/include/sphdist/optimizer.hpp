#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curves.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "nelder_mead.hpp"
#include "quadrature.hpp"
#include "scalar_search.hpp"

namespace sphdist {

inline constexpr double kTargetLength = 4.0 * pi;

struct Bracket {
    double lo = 0.0;
    double hi = 1.0;
};

/// One-parameter curve family with a designated scale parameter.
struct ScaleFamily {
    std::string name;
    std::function<SphericalCurve(double)> make;
    Bracket default_bracket;
};

struct CalibrationOptions {
    double target = kTargetLength;
    double tol = 1e-9;
    std::size_t prescan_points = 32;
    QuadratureRule rule = QuadratureRule::trapezoid(256, 1e-11);
    /// The pre-scan only needs signs, so it integrates more loosely.
    QuadratureRule prescan_rule = QuadratureRule::trapezoid(256, 1e-6);
};

struct CalibrationReport {
    std::string family;
    double parameter = 0.0;
    double arc_length = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    Bracket bracket;
    /// Sub-interval of the pre-scan that held the chosen sign change.
    Bracket root_bracket;
    std::size_t sign_changes = 0;
    bool non_monotone = false;
    bool converged = false;
};

/// Solves arc_length(family(p)) = target for p in the bracket.
///
/// The bracket is pre-scanned at `prescan_points` points; with no sign change
/// NoBracket is thrown. With several, the one nearest the bracket midpoint is
/// bisected and `non_monotone` is set.
inline CalibrationReport calibrate_arc_length(const ScaleFamily& family, Bracket bracket,
                                              const CalibrationOptions& opt = {}) {
    require(bracket.lo < bracket.hi, "calibrate_arc_length: empty bracket");
    require(opt.tol > 0.0, "calibrate_arc_length: tol must be positive");
    require(opt.prescan_points >= 2, "calibrate_arc_length: need at least 2 pre-scan points");
    auto residual_with = [&](double p, const QuadratureRule& rule) {
        return arc_length(family.make(p), rule).value - opt.target;
    };
    auto residual_at = [&](double p) { return residual_with(p, opt.rule); };

    std::vector<double> ps(opt.prescan_points), gs(opt.prescan_points);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        ps[i] = bracket.lo + (bracket.hi - bracket.lo) * static_cast<double>(i) / static_cast<double>(ps.size() - 1);
        gs[i] = residual_with(ps[i], opt.prescan_rule);
    }
    std::vector<std::size_t> changes;
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        if (gs[i] == 0.0 || (gs[i] < 0.0) != (gs[i + 1] < 0.0)) changes.push_back(i);
    }
    if (gs.back() == 0.0 && (changes.empty() || changes.back() != ps.size() - 2)) changes.push_back(ps.size() - 2);
    if (changes.empty()) {
        throw NoBracket("calibrate_arc_length(" + family.name + "): arc-length minus target has no sign change in [" +
                        std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) + "]");
    }
    const double mid = 0.5 * (bracket.lo + bracket.hi);
    const std::size_t pick = *std::min_element(changes.begin(), changes.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(0.5 * (ps[a] + ps[a + 1]) - mid) < std::abs(0.5 * (ps[b] + ps[b + 1]) - mid);
    });

    CalibrationReport r;
    r.family = family.name;
    r.bracket = bracket;
    r.root_bracket = {ps[pick], ps[pick + 1]};
    r.sign_changes = changes.size();
    r.non_monotone = changes.size() > 1;
    const BisectionResult b = bisect(residual_at, ps[pick], ps[pick + 1], opt.tol);
    r.parameter = b.root;
    r.residual = std::abs(b.f_root);
    r.arc_length = b.f_root + opt.target;
    r.iterations = b.iterations + opt.prescan_points;
    r.converged = r.residual <= opt.tol;
    return r;
}

inline CalibrationReport calibrate_arc_length(const ScaleFamily& family, const CalibrationOptions& opt = {}) {
    return calibrate_arc_length(family, family.default_bracket, opt);
}

/// Seam with free A.
inline ScaleFamily tennis_ball_scale_family() {
    return {"tennis_ball", [](double A) { return SphericalCurve::tennis_ball(A); }, {0.1, 1.4}};
}

/// Wavy circle with free B.
inline ScaleFamily wavy_circle_scale_family() {
    return {"wavy_circle", [](double B) { return SphericalCurve::wavy_circle(B); }, {0.01, 0.6}};
}

/// Great circle on [0, 2s]; s = 1 is the doubled traversal of length 4π.
inline ScaleFamily great_circle_scale_family() {
    return {"great_circle", [](double s) { return SphericalCurve::great_circle({0.0, 2.0 * s}); }, {0.5, 1.5}};
}

/// Overall amplitude multiplier of a trig series shape.
inline ScaleFamily trig_series_scale_family(TrigSeries shape) {
    return {"trig_series",
            [shape = std::move(shape)](double s) {
                TrigSeries t = shape;
                t.scale = s;
                return SphericalCurve::trig_series(std::move(t));
            },
            {0.2, 2.0}};
}

/// Trig series coefficients reproducing the seam with amplitude A at order J.
inline TrigSeries seam_as_trig_series(double A = 0.7037, std::size_t J = 3) {
    require(J >= 2, "seam_as_trig_series: J must be >= 2 to hold the sin 2t longitude term");
    TrigSeries s;
    s.a.assign(J, 0.0);
    s.b.assign(J, 0.0);
    s.c.assign(J, 0.0);
    s.a[0] = -(half_pi - A);
    s.c[1] = A;
    return s;
}

enum class Objective { M_tilde, sup_dev_from_half_pi, mean_min };

inline std::string to_string(Objective o) {
    switch (o) {
        case Objective::M_tilde: return "M_tilde";
        case Objective::sup_dev_from_half_pi: return "sup_dev_from_half_pi";
        case Objective::mean_min: return "mean_min";
    }
    return "unknown";
}

inline Objective objective_from_string(const std::string& s) {
    if (s == "M_tilde") return Objective::M_tilde;
    if (s == "sup_dev_from_half_pi") return Objective::sup_dev_from_half_pi;
    if (s == "mean_min") return Objective::mean_min;
    throw ConfigError("unknown objective '" + s + "' (expected M_tilde, sup_dev_from_half_pi or mean_min)");
}

struct OptimizerConfig {
    Objective objective = Objective::sup_dev_from_half_pi;
    std::size_t max_evals = 2000;
    double simplex_scale = 0.1;
    std::uint64_t seed = 42;
    std::size_t J = 3;
    double diameter_tol = 1e-6;
    double constraint_tol = 1e-4;
    double calibration_tol = 1e-9;
    std::size_t simplicity_samples = 2048;
    std::size_t mean_min_points = 2000;
    QuadratureRule curve_rule = QuadratureRule::trapezoid(256, 1e-8);
    QuadratureRule sphere_rule = QuadratureRule::gauss_legendre(32, 1e-6);
};

/// Shape vector -> curve, with a designated scale re-calibrated at every
/// trial point.
struct SearchFamily {
    std::string name;
    std::vector<double> initial_shape;
    std::function<SphericalCurve(const std::vector<double>& shape, double scale)> build;
    Bracket scale_bracket;
};

/// Trig series search space: shape = (a_1..a_J, b_1..b_J, c_1..c_J).
inline SearchFamily trig_series_search_family(const TrigSeries& seed) {
    const std::size_t J = seed.order();
    std::vector<double> x;
    for (const auto* v : {&seed.a, &seed.b, &seed.c}) {
        std::vector<double> padded = *v;
        padded.resize(J, 0.0);
        x.insert(x.end(), padded.begin(), padded.end());
    }
    return {"trig_series", x,
            [J, center = seed.theta_center, rate = seed.phi_rate](const std::vector<double>& s, double scale) {
                TrigSeries t;
                t.theta_center = center;
                t.phi_rate = rate;
                t.a.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(J));
                t.b.assign(s.begin() + static_cast<std::ptrdiff_t>(J), s.begin() + static_cast<std::ptrdiff_t>(2 * J));
                t.c.assign(s.begin() + static_cast<std::ptrdiff_t>(2 * J), s.end());
                t.scale = scale;
                return SphericalCurve::trig_series(std::move(t));
            },
            {0.2, 2.0}};
}

/// Wavy circle: no free shape parameters, B is the calibrated scale.
inline SearchFamily wavy_circle_search_family() {
    return {"wavy_circle", {}, [](const std::vector<double>&, double B) { return SphericalCurve::wavy_circle(B); },
            {0.01, 0.6}};
}

struct Iterate {
    std::size_t evaluation = 0;
    std::vector<double> shape;
    double scale = 0.0;
    double objective = 0.0;
    double constraint_residual = 0.0;
    bool closed = false;
};

struct EvaluationRecord {
    std::vector<double> shape;
    double scale = std::numeric_limits<double>::quiet_NaN();
    double constraint_residual = std::numeric_limits<double>::infinity();
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::string rejection;
};

struct OptimizationReport {
    Objective objective = Objective::sup_dev_from_half_pi;
    std::string family;
    std::vector<double> best_shape;
    double best_scale = 0.0;
    double best_objective = std::numeric_limits<double>::infinity();
    double initial_objective = std::numeric_limits<double>::infinity();
    double constraint_residual = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    bool max_evals_reached = false;
    /// Best objective after each simplex iteration.
    std::vector<double> objective_trace;
    /// Strictly improving feasible evaluations, in order.
    std::vector<Iterate> iterates;
    std::vector<EvaluationRecord> history;
};

/// Objective value of an already-feasible curve.
inline double evaluate_objective(const SphericalCurve& c, Objective objective, const OptimizerConfig& cfg) {
    switch (objective) {
        case Objective::M_tilde: return sphere_to_curve_mean(c, cfg.sphere_rule, cfg.curve_rule).total.value;
        case Objective::sup_dev_from_half_pi: return sup_deviation_from_half_pi(c, cfg.curve_rule).sup_deviation;
        case Objective::mean_min: return mean_min_arc_distance(c, cfg.mean_min_points, cfg.seed).value;
    }
    throw ContractViolation("evaluate_objective: unknown objective");
}

/// Nelder-Mead over the family's shape parameters with the arc-length
/// constraint enforced by re-calibrating the scale at every trial point.
/// Infeasible trials (no calibration root, not closed, not simple) score +inf.
inline OptimizationReport minimize_functional(const SearchFamily& family, const OptimizerConfig& cfg) {
    require(cfg.max_evals >= 1, "minimize_functional: max_evals must be >= 1");
    OptimizationReport report;
    report.objective = cfg.objective;
    report.family = family.name;

    CalibrationOptions cal;
    cal.tol = cfg.calibration_tol;

    auto evaluate = [&](const std::vector<double>& shape) {
        EvaluationRecord rec;
        rec.shape = shape;
        bool calibration_failed = false;
        try {
            const ScaleFamily sf{family.name, [&](double s) { return family.build(shape, s); }, family.scale_bracket};
            const CalibrationReport cr = calibrate_arc_length(sf, family.scale_bracket, cal);
            rec.scale = cr.parameter;
            rec.constraint_residual = cr.residual;
            const SphericalCurve c = family.build(shape, cr.parameter);
            if (cr.residual > cfg.constraint_tol) {
                rec.rejection = "arc-length constraint not met";
            } else if (!is_closed(c, 1e-8)) {
                rec.rejection = "not closed";
            } else if (!is_simple(c, cfg.simplicity_samples).simple) {
                rec.rejection = "not simple";
            } else {
                rec.objective = evaluate_objective(c, cfg.objective, cfg);
                rec.feasible = std::isfinite(rec.objective);
                if (!rec.feasible) rec.rejection = "non-finite objective";
            }
        } catch (const NoBracket& e) {
            calibration_failed = true;
            rec.rejection = e.what();
        } catch (const ContractViolation& e) {
            rec.rejection = e.what();
        }
        if (report.history.empty() && calibration_failed) {
            throw CalibrationFailed("minimize_functional: initial point cannot be calibrated: " + rec.rejection);
        }
        if (report.history.empty() && !rec.feasible) {
            throw ContractViolation("minimize_functional: initial point is infeasible: " + rec.rejection);
        }
        report.history.push_back(rec);
        if (rec.feasible && (report.iterates.empty() || rec.objective < report.iterates.back().objective)) {
            const SphericalCurve c = family.build(shape, rec.scale);
            report.iterates.push_back(
                {report.history.size(), shape, rec.scale, rec.objective, rec.constraint_residual, is_closed(c, 1e-8)});
        }
        return rec.objective;
    };

    NelderMeadOptions nm;
    nm.initial_scale = cfg.simplex_scale;
    nm.diameter_tol = cfg.diameter_tol;
    nm.max_evals = cfg.max_evals;
    const NelderMeadResult res = nelder_mead(evaluate, family.initial_shape, nm);

    report.evaluations = res.evaluations;
    report.converged = res.converged;
    report.max_evals_reached = res.max_evals_reached;
    report.objective_trace = res.best_trace;
    report.initial_objective = report.history.front().objective;
    const Iterate& best = report.iterates.back();
    report.best_shape = best.shape;
    report.best_scale = best.scale;
    report.best_objective = best.objective;
    report.constraint_residual = best.constraint_residual;
    return report;
}

}  // namespace sphdist
