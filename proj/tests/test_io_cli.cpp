#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sphdist/cli.hpp"
#include "sphdist/io.hpp"
#include "sphdist/verify.hpp"

using namespace sphdist;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sphdist");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::vector<double> fields(const std::string& row) {
    std::vector<double> v;
    std::istringstream in(row);
    for (std::string f; std::getline(in, f, ',');) v.push_back(std::stod(f));
    return v;
}

const json* find_result(const json& report, const std::string& name) {
    for (const auto& r : report.at("results"))
        if (r.at("name") == name) return &r;
    return nullptr;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("sphdist_test_" + name);
}

}  // namespace

TEST(CurveJson, RoundTrip) {
    const json spec = {{"family", "trig_series"},
                       {"params", {{"a", {0.1, 0.2}}, {"c", {0.0, 0.3}}, {"scale", 0.9}}},
                       {"domain", {0.0, 4.0 * pi}}};
    const auto c = io::curve_from_json(spec);
    const auto again = io::curve_from_json(io::curve_to_json(c));
    for (double t : {0.0, 1.0, 7.5}) EXPECT_EQ(c.position(t), again.position(t));
}

TEST(CurveJson, DefaultsToNaturalDomain) {
    EXPECT_EQ(io::curve_from_json({{"family", "tennis_ball"}}).domain(), (CurveDomain{0.0, 4.0 * pi}));
    EXPECT_EQ(io::curve_from_json({{"family", "great_circle"}}).domain(), (CurveDomain{0.0, 2.0}));
}

TEST(CurveJson, SchemaErrors) {
    EXPECT_THROW(io::curve_from_json({{"family", "ellipse"}}), ConfigError);
    EXPECT_THROW(io::curve_from_json({{"family", "tennis_ball"}, {"params", {{"B", 0.1}}}}), ConfigError);
    EXPECT_THROW(io::curve_from_json({{"family", "tennis_ball"}, {"params", {{"A", "x"}}}}), ConfigError);
    EXPECT_THROW(io::curve_from_json({{"family", "tennis_ball"}, {"params", {{"A", 3.0}}}}), ConfigError);
    EXPECT_THROW(io::curve_from_json({{"family", "great_circle"}, {"domain", {1.0}}}), ConfigError);
    EXPECT_THROW(io::curve_from_json({{"family", "great_circle"}, {"extra", 1}}), ConfigError);
    EXPECT_THROW(io::curve_from_json(json::array()), ConfigError);
}

TEST(RuleJson, ParsesAndValidates) {
    const auto r = io::rule_from_json({{"rule", "monte_carlo"}, {"n", 1000}, {"seed", 5}}, QuadratureRule{});
    EXPECT_EQ(r.kind, RuleKind::monte_carlo);
    EXPECT_EQ(r.n, 1000u);
    EXPECT_EQ(r.seed, 5u);
    EXPECT_THROW(io::rule_from_json({{"rule", "simpson"}}, QuadratureRule{}), ConfigError);
    EXPECT_THROW(io::rule_from_json({{"n", 1}}, QuadratureRule{}), ConfigError);
    EXPECT_THROW(io::rule_from_json({{"n", -3}}, QuadratureRule{}), ConfigError);
}

TEST(Cli, SampleGreatCircle) {
    const auto r = run_cli({"sample", "--curve", R"({"family":"great_circle","domain":[0,1]})", "--n", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "t,x,y,z");
    for (int k = 0; k < 5; ++k) {
        const auto f = fields(rows[k + 1]);
        ASSERT_EQ(f.size(), 4u);
        EXPECT_NEAR(f[0], 0.25 * k, 1e-15);
        EXPECT_NEAR(f[1], std::sin(two_pi * f[0]), 1e-15);
        EXPECT_EQ(f[2], 0.0);
        EXPECT_NEAR(f[3], std::cos(two_pi * f[0]), 1e-15);
    }
}

TEST(Cli, SampleSeamFirstRowAndUnitNorm) {
    const auto r = run_cli({"sample", "--curve", R"({"family":"tennis_ball","params":{"A":0.7037}})", "--n", "1024"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 1025u);
    const auto first = fields(rows[1]);
    EXPECT_EQ(first[0], 0.0);
    EXPECT_NEAR(first[1], std::sin(0.7037), 1e-16);
    EXPECT_NEAR(first[3], std::cos(0.7037), 1e-16);
    EXPECT_NEAR(fields(rows.back())[0], 4.0 * pi, 1e-15);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        EXPECT_NEAR(std::sqrt(f[1] * f[1] + f[2] * f[2] + f[3] * f[3]), 1.0, 1e-12);
    }
    // 17 significant digits survive a round trip exactly.
    const auto p = SphericalCurve::tennis_ball(0.7037).position(fields(rows[100])[0]);
    EXPECT_EQ(fields(rows[100])[1], p.x);
}

TEST(Cli, SampleRejectsSingleRow) {
    EXPECT_EQ(run_cli({"sample", "--n", "1"}).code, 2);
    EXPECT_EQ(run_cli({"sample", "--n", "0"}).code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(run_cli({"eval", "--curve", "{not json"}).code, 2);
    EXPECT_EQ(run_cli({"eval", "--curve", R"({"family":"spiral"})"}).code, 2);
    EXPECT_EQ(run_cli({"eval", "--config", "/nonexistent/config.json"}).code, 2);
    EXPECT_EQ(run_cli({"eval", "--rule", "simpson"}).code, 2);
    EXPECT_EQ(run_cli({"verify", "--config", R"({"bogus": 1})"}).code, 2);
    EXPECT_EQ(run_cli({"verify", "--config", "{"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"optimize", "--config", R"({"optimizer":{"family":"spline"}})"}).code, 2);
}

TEST(Cli, HelpAndVersion) {
    const auto h = run_cli({"--help"});
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("radians"), std::string::npos);
    const auto v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find(kVersion), std::string::npos);
}

TEST(Cli, EvalWavyCircleReport) {
    const auto cfg = R"({"curve":{"family":"wavy_circle"},"points":[[0,1]],"quadrature":{"n":32,"tol":1e-6},
                         "mean_min":{"n_points":2000}})";
    const auto r = run_cli({"eval", "--config", cfg});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    EXPECT_EQ(rep.at("version"), kVersion);
    EXPECT_EQ(rep.at("config").at("curve").at("family"), "wavy_circle");
    const json* s = find_result(rep, "S_tilde(theta0=0,phi0=1)");
    ASSERT_NE(s, nullptr);
    EXPECT_NEAR(s->at("value").get<double>(), 2.3562, 1e-4);
    EXPECT_EQ(s->at("pass"), true);
    for (const char* name : {"arc_length", "is_closed", "is_simple", "M", "M_tilde", "M_tilde_normalized", "mean_min"})
        EXPECT_NE(find_result(rep, name), nullptr) << name;
    for (const auto& row : rep.at("results")) {
        EXPECT_TRUE(row.contains("value"));
        EXPECT_TRUE(row.contains("error_estimate"));
    }
}

TEST(Cli, EvalSeamHasSurfaceMeanRow) {
    const auto r = run_cli({"eval", "--n", "32", "--tol", "1e-6"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    const json* m = find_result(rep, "M_tilde");
    ASSERT_NE(m, nullptr);
    EXPECT_NEAR(m->at("value").get<double>(), 2 * pi * pi, 1e-5);
    EXPECT_EQ(m->at("paper_value").get<double>(), 2 * pi * pi);
}

TEST(Cli, EvalDoubledGreatCircleIsNotSimple) {
    const auto r = run_cli({"eval", "--curve", R"({"family":"great_circle","domain":[0,2]})", "--n", "16"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    const json* s = find_result(rep, "is_simple");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->at("value").get<double>(), 0.0);
    EXPECT_EQ(s->at("pass"), true);
    EXPECT_TRUE(s->contains("witness"));
}

TEST(Cli, ReportsAreByteIdentical) {
    const auto a = temp_file("a.json"), b = temp_file("b.json");
    const std::vector<std::string> args{"eval", "--curve", R"({"family":"tennis_ball"})", "--n", "16", "--seed", "7"};
    auto with_out = [&](const std::filesystem::path& p) {
        auto v = args;
        v.push_back("--out");
        v.push_back(p.string());
        return run_cli(v);
    };
    ASSERT_EQ(with_out(a).code, 0);
    ASSERT_EQ(with_out(b).code, 0);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string sa = slurp(a);
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, slurp(b));
    EXPECT_EQ(json::parse(sa).at("config").at("seed"), 7);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(Cli, CalibrateSeamAndWavy) {
    const auto seam = run_cli({"calibrate", "--curve", R"({"family":"tennis_ball"})"});
    ASSERT_EQ(seam.code, 0) << seam.err;
    const json seam_rep = json::parse(seam.out);
    const json* a = find_result(seam_rep, "parameter");
    EXPECT_NEAR(a->at("value").get<double>(), 0.7037, 5e-4);
    EXPECT_EQ(a->at("pass"), true);

    // The 4π root is not the quoted 0.1856; the report says so.
    const auto wavy = run_cli({"calibrate", "--curve", R"({"family":"wavy_circle"})"});
    ASSERT_EQ(wavy.code, 0) << wavy.err;
    const json wavy_rep = json::parse(wavy.out);
    const json* b = find_result(wavy_rep, "parameter");
    EXPECT_NEAR(b->at("value").get<double>(), 0.286241, 1e-5);
    EXPECT_EQ(b->at("paper_value").get<double>(), 0.1856);
    EXPECT_EQ(b->at("pass"), false);
}

TEST(Cli, CalibrateWithoutRootIsNumericalFailure) {
    const auto r = run_cli({"calibrate", "--config", R"({"curve":{"family":"tennis_ball"},"calibrate":{"bracket":[1.0,1.4]}})"});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, OptimizeSingleEvaluationIsFlagged) {
    const auto r = run_cli({"optimize", "--n", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    EXPECT_EQ(rep.at("details").at("evaluations"), 1);
    EXPECT_EQ(rep.at("details").at("flag"), "MaxEvaluationsReached");
    EXPECT_EQ(find_result(rep, "best_objective")->at("value"), find_result(rep, "initial_objective")->at("value"));
}

TEST(Verify, MonteCarloRowsUseStandardErrors) {
    verify::Options o;
    o.sphere_rule = QuadratureRule::monte_carlo(1000, 42);
    for (const auto& c : verify::criteria()) {
        if (c.id != 1 && c.id != 2) continue;
        const auto row = verify::run_criterion(c, o);
        EXPECT_TRUE(row.passed) << row.id << ": " << row.detail;
    }
}

TEST(Verify, TableHasOneRowPerCriterion) {
    EXPECT_EQ(verify::criteria().size(), 12u);
    verify::Options o;
    for (const auto& c : verify::criteria()) {
        if (c.id != 10 && c.id != 5) continue;
        const auto row = verify::run_criterion(c, o);
        EXPECT_EQ(row.id, c.id);
        EXPECT_TRUE(row.passed) << row.detail;
        const auto table = cli::detail::format_table({row});
        EXPECT_NE(table.find("PASS"), std::string::npos);
    }
}
