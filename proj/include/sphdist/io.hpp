#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curves.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "optimizer.hpp"
#include "quadrature.hpp"

namespace sphdist::io {

using nlohmann::json;

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

inline double number(const json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": '" + key + "' must be finite");
    return x;
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

inline std::size_t count_or(const json& j, const char* key, std::size_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(where + ": '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

inline std::vector<double> numbers_or_empty(const json& j, const char* key, const std::string& where) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace detail

/// {"family": ..., "params": {...}, "domain": [t_i, t_f]}; domain defaults
/// to the family's natural closed domain.
inline SphericalCurve curve_from_json(const json& j) {
    const std::string where = "curve";
    detail::only_keys(j, {"family", "params", "domain"}, where);
    if (!j.contains("family") || !j.at("family").is_string()) throw ConfigError(where + ": missing string 'family'");
    const std::string name = j.at("family").get<std::string>();
    const json params = j.value("params", json::object());
    CurveFamily family;
    try {
        if (name == "great_circle") {
            detail::only_keys(params, {}, where + ".params");
            family = GreatCircle{};
        } else if (name == "tennis_ball") {
            detail::only_keys(params, {"A"}, where + ".params");
            family = TennisBallSeam{detail::number_or(params, "A", 0.7037, where)};
        } else if (name == "wavy_circle") {
            detail::only_keys(params, {"B"}, where + ".params");
            family = WavyCircle{detail::number_or(params, "B", 0.1856, where)};
        } else if (name == "trig_series") {
            detail::only_keys(params, {"theta_center", "phi_rate", "a", "b", "c", "scale"}, where + ".params");
            TrigSeries t;
            t.theta_center = detail::number_or(params, "theta_center", half_pi, where);
            t.phi_rate = detail::number_or(params, "phi_rate", 0.5, where);
            t.a = detail::numbers_or_empty(params, "a", where);
            t.b = detail::numbers_or_empty(params, "b", where);
            t.c = detail::numbers_or_empty(params, "c", where);
            t.scale = detail::number_or(params, "scale", 1.0, where);
            family = t;
        } else {
            throw ConfigError(where + ": unknown family '" + name +
                              "' (expected great_circle, tennis_ball, wavy_circle or trig_series)");
        }
        CurveDomain domain = natural_domain(family);
        if (j.contains("domain")) {
            const auto& d = j.at("domain");
            if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
                throw ConfigError(where + ": 'domain' must be [t_i, t_f]");
            domain = {d[0].get<double>(), d[1].get<double>()};
        }
        return SphericalCurve(family, domain);
    } catch (const ContractViolation& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline json curve_to_json(const SphericalCurve& c) {
    json params = json::object();
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, TennisBallSeam>) {
                params["A"] = f.A;
            } else if constexpr (std::is_same_v<T, WavyCircle>) {
                params["B"] = f.B;
            } else if constexpr (std::is_same_v<T, TrigSeries>) {
                params = {{"theta_center", f.theta_center}, {"phi_rate", f.phi_rate}, {"a", f.a},
                          {"b", f.b}, {"c", f.c}, {"scale", f.scale}};
            }
        },
        c.family());
    return {{"family", family_name(c.family())}, {"params", params}, {"domain", {c.domain().t_i, c.domain().t_f}}};
}

/// Parses a --curve argument: inline JSON if it starts with '{', else a path.
inline json load_json_argument(const std::string& arg) {
    std::string text = arg;
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || arg[first] != '{') {
        std::ifstream in(arg);
        if (!in) throw ConfigError("cannot open '" + arg + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + (text.size() > 60 ? text.substr(0, 60) + "..." : text) +
                          "': " + e.what());
    }
}

inline std::string rule_name(RuleKind k) {
    switch (k) {
        case RuleKind::periodic_trapezoid: return "trapezoid";
        case RuleKind::gauss_legendre: return "gauss_legendre";
        case RuleKind::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

inline RuleKind rule_kind_from_string(const std::string& s) {
    if (s == "trapezoid" || s == "periodic_trapezoid") return RuleKind::periodic_trapezoid;
    if (s == "gauss_legendre") return RuleKind::gauss_legendre;
    if (s == "monte_carlo") return RuleKind::monte_carlo;
    throw ConfigError("unknown quadrature rule '" + s + "' (expected trapezoid, gauss_legendre or monte_carlo)");
}

/// {"rule": "trapezoid", "n": 512, "tol": 1e-8, "seed": 42}; missing keys
/// keep the values of `base`.
inline QuadratureRule rule_from_json(const json& j, QuadratureRule base) {
    const std::string where = "quadrature";
    detail::only_keys(j, {"rule", "n", "tol", "seed"}, where);
    if (j.contains("rule")) {
        if (!j.at("rule").is_string()) throw ConfigError(where + ": 'rule' must be a string");
        base.kind = rule_kind_from_string(j.at("rule").get<std::string>());
    }
    base.n = detail::count_or(j, "n", base.n, where);
    base.tol = detail::number_or(j, "tol", base.tol, where);
    base.seed = detail::count_or(j, "seed", base.seed, where);
    try {
        base.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    return base;
}

inline json rule_to_json(const QuadratureRule& r) {
    return {{"rule", rule_name(r.kind)}, {"n", r.n}, {"tol", r.tol}, {"seed", r.seed}};
}

/// {"objective": ..., "max_evals": 2000, "simplex_scale": 0.1, "seed": 42, "J": 3}
inline OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig base = {}) {
    const std::string where = "optimizer";
    detail::only_keys(j, {"objective", "max_evals", "simplex_scale", "seed", "J", "family"}, where);
    if (j.contains("objective")) {
        if (!j.at("objective").is_string()) throw ConfigError(where + ": 'objective' must be a string");
        base.objective = objective_from_string(j.at("objective").get<std::string>());
    }
    base.max_evals = detail::count_or(j, "max_evals", base.max_evals, where);
    base.simplex_scale = detail::number_or(j, "simplex_scale", base.simplex_scale, where);
    base.seed = detail::count_or(j, "seed", base.seed, where);
    base.J = detail::count_or(j, "J", base.J, where);
    if (base.max_evals < 1) throw ConfigError(where + ": max_evals must be >= 1");
    if (base.J < 2) throw ConfigError(where + ": J must be >= 2");
    if (!(base.simplex_scale > 0.0)) throw ConfigError(where + ": simplex_scale must be positive");
    return base;
}

inline json optimizer_config_to_json(const OptimizerConfig& c) {
    return {{"objective", to_string(c.objective)}, {"max_evals", c.max_evals}, {"simplex_scale", c.simplex_scale},
            {"seed", c.seed}, {"J", c.J}};
}

inline json to_json(const FunctionalResult& r) {
    return {{"value", r.value}, {"error_estimate", r.error_estimate}, {"nodes_used", r.nodes_used},
            {"converged", r.converged}};
}

inline json to_json(const CalibrationReport& r) {
    return {{"family", r.family},
            {"parameter", r.parameter},
            {"arc_length", r.arc_length},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"bracket", {r.bracket.lo, r.bracket.hi}},
            {"root_bracket", {r.root_bracket.lo, r.root_bracket.hi}},
            {"sign_changes", r.sign_changes},
            {"non_monotone", r.non_monotone},
            {"converged", r.converged}};
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const OptimizationReport& r) {
    json iterates = json::array();
    for (const auto& it : r.iterates) {
        iterates.push_back({{"evaluation", it.evaluation},
                            {"shape", it.shape},
                            {"scale", it.scale},
                            {"objective", it.objective},
                            {"constraint_residual", it.constraint_residual},
                            {"closed", it.closed}});
    }
    json trace = json::array();
    for (double v : r.objective_trace) trace.push_back(finite_or_null(v));
    std::size_t rejected = 0;
    for (const auto& h : r.history) rejected += h.feasible ? 0 : 1;
    return {{"objective", to_string(r.objective)},
            {"family", r.family},
            {"best_shape", r.best_shape},
            {"best_scale", r.best_scale},
            {"best_objective", finite_or_null(r.best_objective)},
            {"initial_objective", finite_or_null(r.initial_objective)},
            {"constraint_residual", r.constraint_residual},
            {"evaluations", r.evaluations},
            {"rejected_evaluations", rejected},
            {"converged", r.converged},
            {"max_evals_reached", r.max_evals_reached},
            {"objective_trace", trace},
            {"iterates", iterates}};
}

}  // namespace sphdist::io
