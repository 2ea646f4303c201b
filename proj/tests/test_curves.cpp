#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sphdist/curves.hpp"
#include "sphdist/errors.hpp"

using namespace sphdist;

namespace {

constexpr double kA = 0.7037;

// Five-point stencil, independent of the library's central difference.
Vec3 stencil_velocity(const SphericalCurve& c, double t, double h) {
    const Vec3 a = c.position(t - 2 * h), b = c.position(t - h), d = c.position(t + h), e = c.position(t + 2 * h);
    return (1.0 / (12.0 * h)) * ((a - e) + 8.0 * (d - b));
}

// Seam speed from hand-differentiated angles.
double seam_speed(double A, double t) {
    const double theta = half_pi - (half_pi - A) * std::cos(t);
    const double dtheta = (half_pi - A) * std::sin(t);
    const double dphi = 0.5 + 2.0 * A * std::cos(2.0 * t);
    return std::hypot(dtheta, std::sin(theta) * dphi);
}

// Composite Simpson on 10^4 panels; an oracle independent of integrate_1d.
template <class F>
double simpson(F f, double a, double b, int panels = 10000) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

TrigSeries random_series(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    TrigSeries s;
    for (int j = 0; j < 3; ++j) {
        s.a.push_back(u(rng));
        s.b.push_back(u(rng));
        s.c.push_back(u(rng));
    }
    return s;
}

}  // namespace

TEST(Curves, GreatCirclePositions) {
    const auto c = SphericalCurve::great_circle();
    const auto p0 = c.position(0.0), p1 = c.position(0.25);
    EXPECT_NEAR(p0.x, 0.0, 1e-15);
    EXPECT_NEAR(p0.z, 1.0, 1e-15);
    EXPECT_NEAR(p1.x, 1.0, 1e-15);
    EXPECT_NEAR(p1.z, 0.0, 1e-15);
}

TEST(Curves, SeamStartPoint) {
    const auto p = SphericalCurve::tennis_ball(kA).position(0.0);
    EXPECT_NEAR(p.x, std::sin(kA), 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    EXPECT_NEAR(p.z, std::cos(kA), 1e-15);
    // Rounded values quoted for this point are (0.6472, 0.7623); the formulas
    // give (0.64704, 0.76245).
    EXPECT_NEAR(p.x, 0.6472, 2e-4);
    EXPECT_NEAR(p.z, 0.7623, 2e-4);
}

TEST(Curves, PositionsAreUnitAndPeriodic) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    const std::vector<SphericalCurve> curves{SphericalCurve::great_circle(), SphericalCurve::tennis_ball(kA),
                                             SphericalCurve::wavy_circle(0.1856),
                                             SphericalCurve::trig_series(random_series(rng))};
    for (const auto& c : curves) {
        const double T = natural_period(c.family());
        for (int k = 0; k < 100; ++k) {
            const double t = u(rng);
            EXPECT_NEAR(norm(c.position(t)), 1.0, 1e-12);
            EXPECT_LT(norm(c.position(t) - c.position(t + T)), 1e-12) << family_name(c.family());
        }
    }
}

TEST(Curves, GreatCircleSpeedIsTwoPi) {
    const auto c = SphericalCurve::great_circle();
    for (double t : {0.0, 0.1, 0.77, 1.5, 1.99}) EXPECT_NEAR(c.speed(t), two_pi, 1e-6);
}

TEST(Curves, LatitudeCircleSpeed) {
    TrigSeries s;
    s.theta_center = 1.1;
    s.phi_rate = 0.5;
    const auto c = SphericalCurve::trig_series(s);
    for (double t : {0.0, 1.0, 5.0}) EXPECT_NEAR(c.speed(t), 0.5 * std::sin(1.1), 1e-8);
}

TEST(Curves, SeamVelocityMatchesStencilAndAnalyticSpeed) {
    const auto c = SphericalCurve::tennis_ball(kA);
    for (double t : {0.0, 0.4, 2.0, 7.0}) {
        const Vec3 v = c.velocity(t);
        EXPECT_LT(norm(v - stencil_velocity(c, t, 1e-3)), 1e-5) << t;
        EXPECT_NEAR(norm(v), seam_speed(kA, t), 1e-8) << t;
    }
}

TEST(Curves, ArcLengthOfGreatCircle) {
    EXPECT_NEAR(arc_length(SphericalCurve::great_circle({0.0, 2.0})).value, 4.0 * pi, 1e-9);
    EXPECT_NEAR(arc_length(SphericalCurve::great_circle({0.0, 1.0})).value, two_pi, 1e-9);
}

TEST(Curves, SeamArcLengthAgainstSimpsonOracle) {
    const double oracle = simpson([](double t) { return seam_speed(kA, t); }, 0.0, 4.0 * pi);
    const auto r = arc_length(SphericalCurve::tennis_ball(kA));
    EXPECT_NEAR(r.value, oracle, 1e-8);
    EXPECT_NEAR(r.value, 4.0 * pi, 2e-3);
    EXPECT_LE(r.error_estimate, 1e-9);
}

TEST(Curves, WavyCircleArcLengthAgainstSimpsonOracle) {
    const double B = 0.1856;
    const double oracle = simpson(
        [&](double t) {
            const double theta = 0.75 * pi + B * std::sin(10.0 * t);
            return std::hypot(10.0 * B * std::cos(10.0 * t), std::sin(theta));
        },
        0.0, two_pi);
    EXPECT_NEAR(arc_length(SphericalCurve::wavy_circle(B)).value, oracle, 1e-8);
}

TEST(Curves, ArcLengthIsAdditive) {
    const auto c = SphericalCurve::tennis_ball(kA);
    const double whole = arc_length(c).value;
    const double left = arc_length(c.with_domain({0.0, 3.0})).value;
    const double right = arc_length(c.with_domain({3.0, 4.0 * pi})).value;
    EXPECT_NEAR(left + right, whole, 1e-9);
}

TEST(Curves, DoublingDomainDoublesLength) {
    const auto c = SphericalCurve::tennis_ball(kA);
    EXPECT_NEAR(arc_length(c.with_domain({0.0, 8.0 * pi})).value, 2.0 * arc_length(c).value, 1e-9);
    const auto w = SphericalCurve::wavy_circle(0.2);
    EXPECT_NEAR(arc_length(w.with_domain({0.0, 4.0 * pi})).value, 2.0 * arc_length(w).value, 1e-9);
}

TEST(Curves, ArcLengthInvariantUnderShiftAndRotation) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 5; ++k) {
        const auto c = SphericalCurve::trig_series(random_series(rng));
        const double L = arc_length(c).value;
        const auto shifted = c.with_domain({c.domain().t_i + 1.3, c.domain().t_f + 1.3});
        EXPECT_NEAR(arc_length(shifted).value, L, 1e-9);
        EXPECT_NEAR(arc_length(c.rotated(Rotation::random(rng))).value, L, 1e-9);
    }
}

TEST(Curves, Closure) {
    EXPECT_TRUE(is_closed(SphericalCurve::great_circle({0.0, 2.0})));
    EXPECT_TRUE(is_closed(SphericalCurve::tennis_ball(kA)));
    EXPECT_TRUE(is_closed(SphericalCurve::wavy_circle(0.1856)));
    EXPECT_FALSE(is_closed(SphericalCurve::great_circle({0.0, 0.5})));
    EXPECT_FALSE(is_closed(SphericalCurve::tennis_ball(kA).with_domain({0.0, two_pi})));
}

TEST(Curves, DoubledGreatCircleIsNotSimple) {
    const auto c = SphericalCurve::great_circle({0.0, 2.0});
    for (std::size_t n : {64u, 500u, 4096u}) {
        const auto r = is_simple(c, n);
        ASSERT_FALSE(r.simple) << n;
        ASSERT_TRUE(r.witness.has_value());
        const auto [t1, t2] = *r.witness;
        EXPECT_GE(t1, 0.0);
        EXPECT_LT(t2, 2.0);
        EXPECT_LT(norm(c.position(t1) - c.position(t2)), 1e-4);
        const double sep = std::abs(t1 - t2);
        EXPECT_GT(std::min(sep, 2.0 - sep), 3.0 * 2.0 / static_cast<double>(n));
    }
}

TEST(Curves, SimpleCurves) {
    EXPECT_TRUE(is_simple(SphericalCurve::tennis_ball(kA)).simple);
    EXPECT_TRUE(is_simple(SphericalCurve::great_circle({0.0, 1.0})).simple);
    EXPECT_TRUE(is_simple(SphericalCurve::wavy_circle(0.1856)).simple);
}

TEST(Curves, FigureEightIsNotSimple) {
    // theta = π/2 + 0.5 sin t, phi = 0.5 sin 2t crosses itself at t = 0, π.
    TrigSeries s;
    s.phi_rate = 0.0;
    s.b = {0.5};
    s.c = {0.0, 0.5};
    const auto r = is_simple(SphericalCurve::trig_series(s));
    ASSERT_FALSE(r.simple);
    const auto [t1, t2] = *r.witness;
    EXPECT_NEAR(std::abs(t2 - t1), pi, 1e-3);
}

TEST(Curves, RejectsInvalidParameters) {
    EXPECT_THROW(SphericalCurve::tennis_ball(0.0), ContractViolation);
    EXPECT_THROW(SphericalCurve::tennis_ball(2.0), ContractViolation);
    EXPECT_THROW(SphericalCurve::wavy_circle(1.0), ContractViolation);
    EXPECT_THROW(SphericalCurve::great_circle({1.0, 1.0}), ContractViolation);
    EXPECT_THROW(is_simple(SphericalCurve::great_circle(), 10), ContractViolation);
}

TEST(Curves, DomainWrap) {
    const CurveDomain d{0.0, 2.0};
    EXPECT_NEAR(d.wrap(-0.5), 1.5, 1e-15);
    EXPECT_NEAR(d.wrap(4.25), 0.25, 1e-15);
    EXPECT_EQ(d.wrap(0.0), 0.0);
}
