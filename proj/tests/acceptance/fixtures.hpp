#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ambool/primitives.hpp"

namespace fixtures {

using namespace ambool;

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double x = u(rng);
  const double y = u(rng);
  const double z = u(rng);
  return normalized(Vec3{x, y, z});
}

// Sphere, box or cylinder of roughly 5k-25k triangles in a random orientation
// around the origin. `size` is a bounding radius.
inline TriMesh random_convex(std::mt19937_64& rng, double* size, std::string* kind) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int pick = int(u(rng) * 3);
  TriMesh m;
  if (pick == 0) {
    const double r = 0.6 + 0.6 * u(rng);
    const int n = 16 + int(u(rng) * 16);
    m = make_geodesic_sphere({0, 0, 0}, r, n);
    *size = r;
    *kind = "sphere";
  } else if (pick == 1) {
    const double ex = 0.8 + u(rng);
    const double ey = 0.8 + u(rng);
    const double ez = 0.8 + u(rng);
    const Vec3 e{ex, ey, ez};
    const int n = 21 + int(u(rng) * 20);
    m = make_box(e * -0.5, e * 0.5, n);
    *size = 0.5 * std::max({e.x, e.y, e.z});
    *kind = "box";
  } else {
    const double r = 0.4 + 0.4 * u(rng);
    const double h = 1.0 + 1.5 * u(rng);
    const int segments = 64 + int(u(rng) * 64);
    const int rings = std::max(2, int(segments * h / (2 * kPi * r)));
    m = make_cylinder({0, 0, -h / 2}, r, h, segments, rings, segments / 6);
    *size = 0.5 * std::hypot(h, 2 * r);
    *kind = "cylinder";
  }
  rotate(m, random_direction(rng), u(rng) * kPi);
  return m;
}

struct ConvexPair {
  TriMesh a, b;
  std::string kind_a, kind_b;
};

// Two random convex solids whose centers are 0.3-0.8 of their mean bounding
// radius apart, so that they always overlap.
inline ConvexPair random_convex_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ConvexPair p;
  double sa = 0.0, sb = 0.0;
  p.a = random_convex(rng, &sa, &p.kind_a);
  p.b = random_convex(rng, &sb, &p.kind_b);
  const Vec3 dir = random_direction(rng);
  const double gap = (0.3 + 0.5 * u(rng)) * (sa + sb) * 0.5;
  translate(p.b, dir * gap);
  return p;
}

}  // namespace fixtures
