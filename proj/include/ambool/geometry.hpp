#pragma once

#include <array>
#include <optional>

#include "ambool/vec3.hpp"

namespace ambool {

using TrianglePoints = std::array<Vec3, 3>;

/// Closest point on triangle `t` to `p`, with barycentric weights.
struct TrianglePoint {
  Vec3 point;
  std::array<double, 3> barycentric{};
};
TrianglePoint closest_point_on_triangle(const TrianglePoints& t, const Vec3& p);

/// Closest points between segments [p0, p1] and [q0, q1].
struct SegmentPair {
  Vec3 on_first;
  Vec3 on_second;
  double distance_squared = 0.0;
};
SegmentPair closest_points_segments(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

bool is_degenerate(const TrianglePoints& t);

/// Minimum Euclidean distance between two triangles (zero when they touch).
double triangle_distance(const TrianglePoints& a, const TrianglePoints& b);

/// Triangle overlap test. With `tolerance` zero this is the exact-float
/// overlap test; with a positive tolerance it reports whether the triangles
/// come within `tolerance` of each other. Symmetric in its arguments.
/// Throws Error(kDegenerateInput) for zero-area triangles.
bool tri_tri_intersect(const TrianglePoints& a, const TrianglePoints& b, double tolerance = 0.0);

/// Approximate intersection segment between a pair of triangles.
struct IntersectionSegment {
  Vec3 p0;
  Vec3 p1;
  int tri_a = -1;
  int tri_b = -1;
};

/// Segment shared by two intersecting, non-coplanar triangles. Returns
/// nullopt when they are disjoint or coplanar.
std::optional<IntersectionSegment> tri_tri_segment(const TrianglePoints& a, const TrianglePoints& b);

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct RayTriangleHit {
  double t = 0.0;
  std::array<double, 3> barycentric{};
  bool unreliable = false;
};

/// Double-sided ray/triangle intersection (Moller-Trumbore) for t > 0.
/// A hit within `edge_eps` (barycentric) of an edge or vertex is flagged
/// unreliable.
std::optional<RayTriangleHit> ray_triangle(const Ray& ray, const TrianglePoints& t, double edge_eps = 1e-9);

/// Ray/box slab test; returns whether the ray hits the box for some t >= 0.
bool ray_hits_box(const Ray& ray, const Aabb& box);

}  // namespace ambool
