#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace ambool {

/// Plain 3D vector in model units. Double precision throughout the library.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  constexpr bool operator==(const Vec3& o) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double length_squared(const Vec3& v) { return dot(v, v); }
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return length(a - b); }
constexpr double distance_squared(const Vec3& a, const Vec3& b) { return length_squared(a - b); }

/// Returns the zero vector when `v` has zero length.
inline Vec3 normalized(const Vec3& v) {
  const double len = length(v);
  return len > 0.0 ? v / len : Vec3{};
}

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a * (1.0 - t) + b * t; }

inline Vec3 min_components(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max_components(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

/// Angle between two vectors in radians, in [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double c = dot(a, b);
  const double s = length(cross(a, b));
  return std::atan2(s, c);
}

/// Unnormalized normal of the triangle (a, b, c); length equals twice the area.
constexpr Vec3 triangle_cross(const Vec3& a, const Vec3& b, const Vec3& c) {
  return cross(b - a, c - a);
}
inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * length(triangle_cross(a, b, c));
}
inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  return normalized(triangle_cross(a, b, c));
}

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  void extend(const Vec3& p) {
    lo = min_components(lo, p);
    hi = max_components(hi, p);
  }
  void extend(const Aabb& b) {
    lo = min_components(lo, b.lo);
    hi = max_components(hi, b.hi);
  }
  Aabb expanded(double r) const { return {lo - Vec3{r, r, r}, hi + Vec3{r, r, r}}; }
  bool overlaps(const Aabb& b) const {
    return lo.x <= b.hi.x && b.lo.x <= hi.x && lo.y <= b.hi.y && b.lo.y <= hi.y &&
           lo.z <= b.hi.z && b.lo.z <= hi.z;
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
  double diagonal() const { return empty() ? 0.0 : length(hi - lo); }
  /// Squared distance from `p` to the box (zero inside).
  double distance_squared_to(const Vec3& p) const {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double v = p[i] < lo[i] ? lo[i] - p[i] : (p[i] > hi[i] ? p[i] - hi[i] : 0.0);
      d += v * v;
    }
    return d;
  }
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace ambool
