#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "curves.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "io.hpp"
#include "optimizer.hpp"
#include "quadrature.hpp"
#include "verify.hpp"
#include "version.hpp"

namespace sphdist::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kAcceptanceFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

/// Flag values shared by all subcommands; unset flags fall back to the
/// --config file, then to built-in defaults.
struct Flags {
    std::string config_path;
    std::string curve;
    std::string rule;
    std::optional<std::size_t> n;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::string out;
};

/// Effective settings of one run, after merging --config and flags.
struct RunConfig {
    std::string command;
    json curve;
    QuadratureRule sphere_rule = QuadratureRule::sphere_default();
    QuadratureRule curve_rule = QuadratureRule::curve_default();
    std::vector<SpherePoint> points;
    std::size_t mean_min_points = 20000;
    std::uint64_t seed = 42;
    std::size_t sample_n = 1024;
    std::optional<Bracket> bracket;
    double calibration_tol = 1e-9;
    OptimizerConfig optimizer;
    std::string optimizer_family = "trig_series";
};

namespace detail {

inline json default_curve_json() { return {{"family", "tennis_ball"}}; }

inline RunConfig load_run_config(const std::string& command, const Flags& f) {
    RunConfig rc;
    rc.command = command;
    rc.curve = default_curve_json();
    if (!f.config_path.empty()) {
        const json j = io::load_json_argument(f.config_path);
        io::detail::only_keys(j,
                              {"command", "curve", "quadrature", "curve_quadrature", "points", "mean_min", "seed",
                               "sample", "calibrate", "optimizer"},
                              "config");
        if (j.contains("curve")) rc.curve = j.at("curve");
        if (j.contains("quadrature")) rc.sphere_rule = io::rule_from_json(j.at("quadrature"), rc.sphere_rule);
        if (j.contains("curve_quadrature"))
            rc.curve_rule = io::rule_from_json(j.at("curve_quadrature"), rc.curve_rule);
        if (j.contains("seed")) rc.seed = io::detail::count_or(j, "seed", rc.seed, "config");
        if (j.contains("points")) {
            const auto& pts = j.at("points");
            if (!pts.is_array()) throw ConfigError("config: 'points' must be an array of [theta0, phi0]");
            for (const auto& p : pts) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError("config: each point must be [theta0, phi0] in radians");
                try {
                    rc.points.push_back(SpherePoint::make(p[0].get<double>(), p[1].get<double>()));
                } catch (const ContractViolation& e) {
                    throw ConfigError(std::string("config: ") + e.what());
                }
            }
        }
        if (j.contains("mean_min")) {
            const auto& m = j.at("mean_min");
            io::detail::only_keys(m, {"n_points"}, "config.mean_min");
            rc.mean_min_points = io::detail::count_or(m, "n_points", rc.mean_min_points, "config.mean_min");
        }
        if (j.contains("sample")) {
            const auto& s = j.at("sample");
            io::detail::only_keys(s, {"n"}, "config.sample");
            rc.sample_n = io::detail::count_or(s, "n", rc.sample_n, "config.sample");
        }
        if (j.contains("calibrate")) {
            const auto& c = j.at("calibrate");
            io::detail::only_keys(c, {"bracket", "tol"}, "config.calibrate");
            if (c.contains("bracket")) {
                const auto& b = c.at("bracket");
                if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
                    throw ConfigError("config.calibrate: 'bracket' must be [lo, hi]");
                rc.bracket = Bracket{b[0].get<double>(), b[1].get<double>()};
            }
            rc.calibration_tol = io::detail::number_or(c, "tol", rc.calibration_tol, "config.calibrate");
        }
        if (j.contains("optimizer")) {
            rc.optimizer = io::optimizer_config_from_json(j.at("optimizer"), rc.optimizer);
            if (j.at("optimizer").contains("family")) {
                const auto& fam = j.at("optimizer").at("family");
                if (!fam.is_string()) throw ConfigError("config.optimizer: 'family' must be a string");
                rc.optimizer_family = fam.get<std::string>();
            }
        }
    }
    if (!f.curve.empty()) rc.curve = io::load_json_argument(f.curve);

    // Command-specific meaning of the shared numeric flags.
    if (command == "sample") {
        if (f.n) rc.sample_n = *f.n;
    } else if (command == "calibrate") {
        if (f.tol) rc.calibration_tol = *f.tol;
    } else if (command == "optimize") {
        if (f.n) rc.optimizer.max_evals = *f.n;
        if (f.seed) rc.optimizer.seed = *f.seed;
    } else {
        if (!f.rule.empty()) rc.sphere_rule.kind = io::rule_kind_from_string(f.rule);
        if (f.n) rc.sphere_rule.n = *f.n;
        if (f.tol) rc.sphere_rule.tol = *f.tol;
        if (f.seed) rc.sphere_rule.seed = *f.seed;
    }
    if (f.seed) rc.seed = *f.seed;
    try {
        rc.sphere_rule.validate();
        rc.curve_rule.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    if (rc.calibration_tol <= 0.0) throw ConfigError("calibration tol must be positive");
    if (rc.optimizer.max_evals < 1) throw ConfigError("optimizer max_evals must be >= 1");
    // Parse now so schema errors surface before any computation.
    (void)io::curve_from_json(rc.curve);
    return rc;
}

inline json config_to_json(const RunConfig& rc) {
    json points = json::array();
    for (const auto& p : rc.points) points.push_back({p.theta, p.phi});
    json j = {{"command", rc.command},
              {"curve", io::curve_to_json(io::curve_from_json(rc.curve))},
              {"quadrature", io::rule_to_json(rc.sphere_rule)},
              {"curve_quadrature", io::rule_to_json(rc.curve_rule)},
              {"seed", rc.seed}};
    if (rc.command == "eval") {
        j["points"] = points;
        j["mean_min"] = {{"n_points", rc.mean_min_points}};
    } else if (rc.command == "sample") {
        j["sample"] = {{"n", rc.sample_n}};
    } else if (rc.command == "calibrate") {
        j["calibrate"] = {{"tol", rc.calibration_tol}};
        if (rc.bracket) j["calibrate"]["bracket"] = {rc.bracket->lo, rc.bracket->hi};
    } else if (rc.command == "optimize") {
        j["optimizer"] = io::optimizer_config_to_json(rc.optimizer);
        j["optimizer"]["family"] = rc.optimizer_family;
    }
    return j;
}

inline json result_row(const std::string& name, double value, double error_estimate) {
    return {{"name", name}, {"value", io::finite_or_null(value)}, {"error_estimate", io::finite_or_null(error_estimate)}};
}

inline json result_row(const std::string& name, const FunctionalResult& r) {
    json row = result_row(name, r.value, r.error_estimate);
    row["nodes_used"] = r.nodes_used;
    row["converged"] = r.converged;
    return row;
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

inline json report(const RunConfig& rc, json results, json extra = nullptr) {
    json j = {{"config", config_to_json(rc)}, {"version", std::string(kVersion)}, {"results", std::move(results)}};
    if (!extra.is_null()) j["details"] = std::move(extra);
    return j;
}

inline std::string label(const SpherePoint& p) {
    std::ostringstream s;
    s << std::setprecision(17) << "S_tilde(theta0=" << p.theta << ",phi0=" << p.phi << ")";
    return s.str();
}

inline int cmd_eval(const RunConfig& rc, const Flags& f, std::ostream& out) {
    const SphericalCurve c = io::curve_from_json(rc.curve);
    json results = json::array();
    const FunctionalResult len = arc_length(c, rc.curve_rule);
    results.push_back(result_row("arc_length", len));
    const bool closed = is_closed(c, 1e-8);
    results.push_back(result_row("is_closed", closed ? 1.0 : 0.0, 0.0));
    const SimplicityReport simple = is_simple(c);
    json simple_row = result_row("is_simple", simple.simple ? 1.0 : 0.0, 0.0);
    if (simple.witness) simple_row["witness"] = {simple.witness->first, simple.witness->second};
    simple_row["closest_approach"] = simple.closest_approach;
    if (std::holds_alternative<GreatCircle>(c.family()) && std::abs(c.domain().length() - 2.0) < 1e-12) {
        simple_row["paper_value"] = 0.0;
        simple_row["pass"] = !simple.simple;
    }
    results.push_back(simple_row);
    if (closed) {
        json m = result_row("M", curve_to_sphere_mean_M(c, rc.curve_rule));
        m["paper_value"] = 2.0 * pi * pi;
        m["pass"] = std::abs(m["value"].get<double>() - 2.0 * pi * pi) <= 1e-3 * 2.0 * pi * pi;
        results.push_back(m);
    }
    for (const auto& p : rc.points) {
        json s = result_row(label(p), point_to_curve_mean(c, p, rc.curve_rule));
        if (std::holds_alternative<WavyCircle>(c.family()) && p.theta == 0.0 && p.phi == 1.0) {
            s["paper_value"] = 2.3562;
            s["pass"] = std::abs(s["value"].get<double>() - 2.3562) <= 1e-4;
        }
        results.push_back(s);
    }
    const SurfaceMean mt = sphere_to_curve_mean(c, rc.sphere_rule);
    json mt_row = result_row("M_tilde", mt.total);
    if (std::holds_alternative<TennisBallSeam>(c.family())) {
        mt_row["paper_value"] = 2.0 * pi * pi;
        mt_row["pass"] = std::abs(mt.total.value - 2.0 * pi * pi) <= 5e-2 * 2.0 * pi * pi;
    }
    results.push_back(mt_row);
    results.push_back(result_row("M_tilde_normalized", mt.normalized));
    results.push_back(result_row("mean_min", mean_min_arc_distance(c, rc.mean_min_points, rc.seed)));
    const DeviationReport dev = sup_deviation_from_half_pi(c, rc.curve_rule);
    results.push_back(result_row("sup_dev_from_half_pi", dev.sup_deviation, 0.0));
    write_output(f.out, report(rc, results).dump(2) + "\n", out);
    return kOk;
}

inline int cmd_sample(const RunConfig& rc, const Flags& f, std::ostream& out) {
    if (rc.sample_n < 2) throw ConfigError("sample: n must be >= 2");
    const SphericalCurve c = io::curve_from_json(rc.curve);
    std::string text = "t,x,y,z\n";
    const double t0 = c.domain().t_i, span = c.domain().length();
    char buf[128];
    for (std::size_t k = 0; k < rc.sample_n; ++k) {
        const double t = k + 1 == rc.sample_n ? c.domain().t_f
                                              : t0 + span * static_cast<double>(k) / static_cast<double>(rc.sample_n - 1);
        const UnitVector p = c.position(t);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", t, p.x, p.y, p.z);
        text += buf;
    }
    write_output(f.out, text, out);
    return kOk;
}

inline ScaleFamily scale_family_for(const SphericalCurve& c) {
    return std::visit(
        [&](const auto& fam) -> ScaleFamily {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, TennisBallSeam>) return tennis_ball_scale_family();
            else if constexpr (std::is_same_v<T, WavyCircle>) return wavy_circle_scale_family();
            else if constexpr (std::is_same_v<T, GreatCircle>) return great_circle_scale_family();
            else return trig_series_scale_family(fam);
        },
        c.family());
}

inline int cmd_calibrate(const RunConfig& rc, const Flags& f, std::ostream& out) {
    const SphericalCurve c = io::curve_from_json(rc.curve);
    const ScaleFamily fam = scale_family_for(c);
    CalibrationOptions opt;
    opt.tol = rc.calibration_tol;
    const CalibrationReport cal = calibrate_arc_length(fam, rc.bracket.value_or(fam.default_bracket), opt);
    json results = json::array();
    json p = result_row("parameter", cal.parameter, 0.0);
    if (cal.family == "tennis_ball") p["paper_value"] = 0.7037;
    if (cal.family == "wavy_circle") p["paper_value"] = 0.1856;
    if (p.contains("paper_value")) p["pass"] = std::abs(cal.parameter - p["paper_value"].get<double>()) <= 5e-4;
    results.push_back(p);
    results.push_back(result_row("arc_length", cal.arc_length, cal.residual));
    results.push_back(result_row("residual", cal.residual, 0.0));
    write_output(f.out, report(rc, results, io::to_json(cal)).dump(2) + "\n", out);
    return cal.converged ? kOk : kNumericalFailure;
}

inline int cmd_optimize(const RunConfig& rc, const Flags& f, std::ostream& out) {
    SearchFamily family;
    if (rc.optimizer_family == "trig_series") {
        family = trig_series_search_family(seam_as_trig_series(0.7037, rc.optimizer.J));
    } else if (rc.optimizer_family == "wavy_circle") {
        family = wavy_circle_search_family();
    } else {
        throw ConfigError("optimizer: unknown family '" + rc.optimizer_family + "' (expected trig_series or wavy_circle)");
    }
    const OptimizationReport rep = minimize_functional(family, rc.optimizer);
    json results = json::array();
    results.push_back(result_row("best_objective", rep.best_objective, 0.0));
    results.push_back(result_row("initial_objective", rep.initial_objective, 0.0));
    results.push_back(result_row("best_scale", rep.best_scale, 0.0));
    results.push_back(result_row("constraint_residual", rep.constraint_residual, 0.0));
    json status = io::to_json(rep);
    if (rep.max_evals_reached) status["flag"] = "MaxEvaluationsReached";
    write_output(f.out, report(rc, results, status).dump(2) + "\n", out);
    return kOk;
}

inline std::string format_table(const std::vector<verify::Row>& rows) {
    std::ostringstream s;
    s << std::left << std::setw(4) << "#" << std::setw(8) << "result" << std::setw(62) << "claim" << std::setw(26)
      << "paper value" << std::setw(22) << "computed" << std::setw(30) << "tolerance"
      << "time [s]\n";
    for (const auto& r : rows) {
        std::ostringstream computed;
        computed << std::setprecision(12) << r.computed;
        std::ostringstream secs;
        secs << std::fixed << std::setprecision(2) << r.seconds << " / " << std::setprecision(0) << r.budget_seconds;
        s << std::left << std::setw(4) << r.id << std::setw(8) << (r.passed ? "PASS" : "FAIL") << std::setw(62)
          << r.claim.substr(0, 60) << std::setw(26) << r.paper_value << std::setw(22) << computed.str()
          << std::setw(30) << r.tolerance << secs.str() << "\n";
        s << "      " << r.detail << "\n";
    }
    return s.str();
}

inline int cmd_verify(const RunConfig& rc, const Flags& f, std::ostream& out) {
    verify::Options opt;
    opt.sphere_rule = rc.sphere_rule;
    opt.seed = rc.seed;
    const auto rows = verify::run_all(opt);
    bool all = true;
    json results = json::array();
    for (const auto& r : rows) {
        all = all && r.passed;
        json row = result_row("criterion_" + std::to_string(r.id), r.computed, r.error_estimate);
        row["claim"] = r.claim;
        row["paper_value"] = r.paper_value;
        row["tolerance"] = r.tolerance;
        row["pass"] = r.passed;
        row["detail"] = r.detail;
        results.push_back(row);
    }
    out << format_table(rows);
    out << (all ? "all criteria passed\n" : "some criteria FAILED\n");
    if (!f.out.empty()) write_output(f.out, report(rc, results).dump(2) + "\n", out);
    return all ? kOk : kAcceptanceFailure;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Spherical arc-distance functionals over closed curves. All angles are in radians.", "sphdist"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Flags flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "JSON run configuration (file path or inline JSON)");
        sub->add_option("--curve", flags.curve,
                        "curve spec, inline JSON or file: {\"family\": \"tennis_ball\"|\"great_circle\"|"
                        "\"wavy_circle\"|\"trig_series\", \"params\": {...}, \"domain\": [t_i, t_f]}");
        sub->add_option("--rule", flags.rule, "surface quadrature: trapezoid | gauss_legendre | monte_carlo");
        sub->add_option("--n", flags.n, "node/sample count (sample: rows; optimize: max evaluations)");
        sub->add_option("--tol", flags.tol, "absolute tolerance (calibrate: arc-length tolerance)");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--out", flags.out, "output path (default: stdout)");
    };
    CLI::App* verify_cmd = app.add_subcommand("verify", "reproduce every numeric claim; exit 0 iff all pass");
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate all functionals on a curve, JSON report");
    CLI::App* sample_cmd = app.add_subcommand("sample", "curve points as CSV t,x,y,z");
    CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "solve for the family parameter giving arc-length 4pi");
    CLI::App* optimize_cmd = app.add_subcommand("optimize", "Nelder-Mead search over a curve family at arc-length 4pi");
    for (auto* sub : {verify_cmd, eval_cmd, sample_cmd, calibrate_cmd, optimize_cmd}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        std::string command;
        for (auto* sub : {verify_cmd, eval_cmd, sample_cmd, calibrate_cmd, optimize_cmd})
            if (sub->parsed()) command = sub->get_name();
        const RunConfig rc = detail::load_run_config(command, flags);
        if (command == "verify") return detail::cmd_verify(rc, flags, out);
        if (command == "eval") return detail::cmd_eval(rc, flags, out);
        if (command == "sample") return detail::cmd_sample(rc, flags, out);
        if (command == "calibrate") return detail::cmd_calibrate(rc, flags, out);
        return detail::cmd_optimize(rc, flags, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ContractViolation& e) {
        err << "invalid input: " << e.what() << "\n";
        return kConfigError;
    } catch (const NonFiniteIntegrand& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const NoBracket& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const CalibrationFailed& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

}  // namespace sphdist::cli
