#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "errors.hpp"

namespace sphdist {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double half_pi = 0.5 * std::numbers::pi;

/// Wraps an angle into [0, 2π).
inline double normalize_longitude(double phi) {
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod of a tiny negative number can round back up to exactly 2π.
    return r >= two_pi ? 0.0 : r;
}

/// Colatitude/longitude pair on the unit sphere.
///
/// Construct through `SpherePoint::make` to get the canonical form
/// (theta in [0, π], phi in [0, 2π)).
struct SpherePoint {
    double theta = 0.0;
    double phi = 0.0;

    static SpherePoint make(double theta, double phi) {
        require(std::isfinite(theta) && std::isfinite(phi), "SpherePoint: non-finite angle");
        require(theta >= 0.0 && theta <= pi, "SpherePoint: theta outside [0, pi]");
        return SpherePoint{theta, normalize_longitude(phi)};
    }

    friend bool operator==(const SpherePoint&, const SpherePoint&) = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// A point on the unit sphere in Cartesian form.
///
/// The fields are public for cheap access in quadrature loops; `normalized`
/// is the checked way in. `geodesic_distance` rejects vectors whose norm has
/// drifted by more than 1e-6.
struct UnitVector : Vec3 {
    UnitVector() : Vec3{0.0, 0.0, 1.0} {}

    static UnitVector normalized(double x, double y, double z) {
        const double n = std::sqrt(x * x + y * y + z * z);
        require(std::isfinite(n) && n > 0.0, "UnitVector: cannot normalize zero or non-finite vector");
        return UnitVector(x / n, y / n, z / n);
    }
    static UnitVector normalized(Vec3 v) { return normalized(v.x, v.y, v.z); }

    /// Trusts the caller that (x, y, z) is already unit length.
    static UnitVector unchecked(double x, double y, double z) { return UnitVector(x, y, z); }

    UnitVector operator-() const { return UnitVector(-x, -y, -z); }

private:
    UnitVector(double x_, double y_, double z_) : Vec3{x_, y_, z_} {}
};

inline UnitVector spherical_to_cartesian(double theta, double phi) {
    const double st = std::sin(theta);
    return UnitVector::unchecked(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
}

inline UnitVector spherical_to_cartesian(const SpherePoint& p) {
    return spherical_to_cartesian(p.theta, p.phi);
}

/// Inverse of spherical_to_cartesian; at the poles phi is reported as 0.
inline SpherePoint cartesian_to_spherical(const UnitVector& u) {
    const double rho = std::hypot(u.x, u.y);
    const double theta = std::atan2(rho, u.z);
    const double phi = rho == 0.0 ? 0.0 : normalize_longitude(std::atan2(u.y, u.x));
    return SpherePoint{theta, phi};
}

namespace detail {

inline constexpr double kChordSwitch = 0.9;

// Great-circle angle between two unit vectors. Near coincident or antipodal
// inputs arccos is ill-conditioned, so the chord form takes over there.
inline double arc_between(const Vec3& u, const Vec3& v) {
    const double c = dot(u, v);
    if (c > kChordSwitch) return 2.0 * std::asin(std::min(1.0, 0.5 * norm(u - v)));
    if (c < -kChordSwitch) return pi - 2.0 * std::asin(std::min(1.0, 0.5 * norm(u + v)));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace detail

inline constexpr double kUnitNormTolerance = 1e-6;

/// Shortest arc length between two points of the unit sphere, in [0, π].
inline double geodesic_distance(const UnitVector& u, const UnitVector& v) {
    require(std::abs(norm(u) - 1.0) <= kUnitNormTolerance && std::abs(norm(v) - 1.0) <= kUnitNormTolerance,
            "geodesic_distance: input is not unit length");
    return detail::arc_between(u, v);
}

/// Proper rotation of R^3, stored row-major.
struct Rotation {
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    Vec3 apply(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    UnitVector apply(const UnitVector& u) const {
        const Vec3 r = apply(static_cast<const Vec3&>(u));
        return UnitVector::unchecked(r.x, r.y, r.z);
    }

    static Rotation identity() { return {}; }

    /// From a unit quaternion (w, x, y, z).
    static Rotation from_quaternion(double w, double x, double y, double z) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        w /= n, x /= n, y /= n, z /= n;
        Rotation r;
        r.m = {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
        return r;
    }

    /// Haar-uniform random rotation (normalized Gaussian quaternion).
    template <class Rng>
    static Rotation random(Rng& rng) {
        std::normal_distribution<double> g;
        const double w = g(rng), x = g(rng), y = g(rng), z = g(rng);
        return from_quaternion(w, x, y, z);
    }
};

/// Area-uniform samples: cos θ uniform on [-1, 1], φ uniform on [0, 2π).
inline std::vector<SpherePoint> uniform_sphere_sample(std::uint64_t seed, std::size_t n) {
    require(n >= 1, "uniform_sphere_sample: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SpherePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * unit(rng);
        const double phi = two_pi * unit(rng);
        out.push_back(SpherePoint{std::acos(std::clamp(z, -1.0, 1.0)), normalize_longitude(phi)});
    }
    return out;
}

inline std::vector<UnitVector> to_cartesian(const std::vector<SpherePoint>& points) {
    std::vector<UnitVector> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(spherical_to_cartesian(p));
    return out;
}

/// Deterministic near-uniform point set (golden-angle spiral).
inline std::vector<SpherePoint> fibonacci_sphere(std::size_t n) {
    require(n >= 1, "fibonacci_sphere: n must be >= 1");
    const double golden_angle = pi * (3.0 - std::sqrt(5.0));
    std::vector<SpherePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        out.push_back(SpherePoint{std::acos(z), normalize_longitude(golden_angle * static_cast<double>(i))});
    }
    return out;
}

}  // namespace sphdist
