#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sphdist/errors.hpp"
#include "sphdist/geometry.hpp"

using namespace sphdist;

namespace {

// Haversine form, written independently of arc_between.
double haversine(const SpherePoint& a, const SpherePoint& b) {
    const double lat1 = half_pi - a.theta, lat2 = half_pi - b.theta;
    const double s1 = std::sin(0.5 * (lat2 - lat1)), s2 = std::sin(0.5 * (b.phi - a.phi));
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

TEST(Geometry, PoleToEquator) {
    const auto north = spherical_to_cartesian(0.0, 0.0);
    const auto eq = spherical_to_cartesian(half_pi, 0.0);
    EXPECT_NEAR(geodesic_distance(north, eq), half_pi, 1e-15);
}

TEST(Geometry, AntipodesArePiApart) {
    const auto u = UnitVector::normalized(1.0, 2.0, -0.5);
    EXPECT_NEAR(geodesic_distance(u, -u), pi, 1e-15);
    EXPECT_EQ(geodesic_distance(u, u), 0.0);
}

TEST(Geometry, TinySeparationKeepsPrecision) {
    // arccos is off by ~1e-8 here; the chord form is good to ~1e-16.
    const double dtheta = (1.0 + 1e-10) - 1.0;
    const auto u = spherical_to_cartesian(1.0, 0.3);
    const auto v = spherical_to_cartesian(1.0 + 1e-10, 0.3);
    EXPECT_NEAR(geodesic_distance(u, v), dtheta, 1e-15);
    EXPECT_GT(std::abs(std::acos(std::clamp(dot(u, v), -1.0, 1.0)) - dtheta), 1e-12);
    const auto w = spherical_to_cartesian(pi - 1.0 - 1e-10, 0.3 + pi);
    EXPECT_NEAR(geodesic_distance(u, w), pi - 1e-10, 1e-15);
}

TEST(Geometry, MatchesHaversineOnRandomPairs) {
    const auto a = uniform_sphere_sample(1, 500), b = uniform_sphere_sample(2, 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = geodesic_distance(spherical_to_cartesian(a[i]), spherical_to_cartesian(b[i]));
        EXPECT_NEAR(d, haversine(a[i], b[i]), 1e-12) << i;
    }
}

TEST(Geometry, MetricAxiomsOnRandomTriples) {
    const auto p = to_cartesian(uniform_sphere_sample(11, 300));
    for (std::size_t i = 0; i + 2 < p.size(); i += 3) {
        const double ab = geodesic_distance(p[i], p[i + 1]);
        const double bc = geodesic_distance(p[i + 1], p[i + 2]);
        const double ac = geodesic_distance(p[i], p[i + 2]);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, pi);
        EXPECT_EQ(ab, geodesic_distance(p[i + 1], p[i]));
        EXPECT_LE(ac, ab + bc + 1e-14);
    }
}

TEST(Geometry, RotationPreservesDistance) {
    std::mt19937_64 rng(5);
    const auto p = to_cartesian(uniform_sphere_sample(7, 200));
    for (std::size_t i = 0; i + 1 < p.size(); i += 2) {
        const Rotation r = Rotation::random(rng);
        EXPECT_NEAR(geodesic_distance(r.apply(p[i]), r.apply(p[i + 1])), geodesic_distance(p[i], p[i + 1]), 1e-13);
    }
}

TEST(Geometry, RandomRotationIsOrthogonal) {
    std::mt19937_64 rng(9);
    const Rotation r = Rotation::random(rng);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += r.m[i][k] * r.m[j][k];
            EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-14);
        }
    const auto& m = r.m;
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    EXPECT_NEAR(det, 1.0, 1e-14);
}

TEST(Geometry, SphericalRoundTrip) {
    for (const auto& p : uniform_sphere_sample(3, 200)) {
        const SpherePoint q = cartesian_to_spherical(spherical_to_cartesian(p));
        EXPECT_NEAR(q.theta, p.theta, 1e-12);
        EXPECT_NEAR(std::cos(q.phi), std::cos(p.phi), 1e-12);
        EXPECT_NEAR(std::sin(q.phi), std::sin(p.phi), 1e-12);
    }
}

TEST(Geometry, SpherePointCanonicalForm) {
    const SpherePoint p = SpherePoint::make(1.0, -0.5);
    EXPECT_NEAR(p.phi, two_pi - 0.5, 1e-15);
    EXPECT_EQ(SpherePoint::make(0.2, two_pi).phi, 0.0);
    EXPECT_GE(normalize_longitude(-1e-18), 0.0);
    EXPECT_LT(normalize_longitude(-1e-18), two_pi);
    EXPECT_THROW(SpherePoint::make(-0.1, 0.0), ContractViolation);
    EXPECT_THROW(SpherePoint::make(pi + 0.1, 0.0), ContractViolation);
    EXPECT_THROW(SpherePoint::make(std::nan(""), 0.0), ContractViolation);
}

TEST(Geometry, RejectsNonUnitInput) {
    EXPECT_THROW(UnitVector::normalized(0.0, 0.0, 0.0), ContractViolation);
    const auto bad = UnitVector::unchecked(1.0, 1.0, 0.0);
    EXPECT_THROW(geodesic_distance(bad, UnitVector{}), ContractViolation);
}

TEST(Geometry, UniformSampleIsSeededAndAreaUniform) {
    const auto a = uniform_sphere_sample(42, 20000), b = uniform_sphere_sample(42, 20000);
    ASSERT_EQ(a, b);
    // cos(theta) ~ U(-1, 1): mean 0, variance 1/3.
    double m = 0.0, v = 0.0;
    for (const auto& p : a) m += std::cos(p.theta);
    m /= a.size();
    for (const auto& p : a) v += (std::cos(p.theta) - m) * (std::cos(p.theta) - m);
    v /= a.size() - 1;
    EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(1.0 / 3.0 / a.size()));
    EXPECT_NEAR(v, 1.0 / 3.0, 0.01);
}

TEST(Geometry, FibonacciDesignIsDeterministicAndBalanced) {
    const auto d = fibonacci_sphere(122);
    ASSERT_EQ(d.size(), 122u);
    Vec3 c;
    for (const auto& u : to_cartesian(d)) c = c + u;
    EXPECT_LT(norm(c) / 122.0, 0.01);
}
