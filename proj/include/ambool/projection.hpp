#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "ambool/constraints.hpp"
#include "ambool/spatial_index.hpp"
#include "ambool/tri_mesh.hpp"

namespace ambool {

struct MeshSurface {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const SpatialIndex> index;
};

struct PolylineCurve {
  std::vector<Vec3> points;
};

struct Sphere {
  Vec3 center;
  double radius = 1.0;
};

struct Plane {
  Vec3 point;
  Vec3 normal{0, 0, 1};  // unit length
};

/// Geometry a moving vertex is snapped back onto.
class ProjectionTarget {
 public:
  using Variant = std::variant<std::monostate, MeshSurface, PolylineCurve, Sphere, Plane>;

  ProjectionTarget() = default;
  explicit ProjectionTarget(Variant v) : target_(std::move(v)) {}

  /// Takes a snapshot of `mesh` and indexes it.
  static ProjectionTarget mesh(TriMesh mesh);
  static ProjectionTarget polyline(std::vector<Vec3> points) { return ProjectionTarget(PolylineCurve{std::move(points)}); }
  static ProjectionTarget sphere(const Vec3& center, double radius) { return ProjectionTarget(Sphere{center, radius}); }
  static ProjectionTarget plane(const Vec3& point, const Vec3& normal) {
    return ProjectionTarget(Plane{point, normalized(normal)});
  }

  bool is_none() const { return std::holds_alternative<std::monostate>(target_); }
  const Variant& variant() const { return target_; }

  /// Closest point on the target; identity for kNone.
  Vec3 project(const Vec3& p) const;
  double distance_to(const Vec3& p) const { return distance(project(p), p); }

 private:
  Variant target_;
};

/// Closest point on an open polyline.
Vec3 closest_point_on_polyline(std::span<const Vec3> points, const Vec3& p);

/// Where a vertex with binding `b` should sit after moving to `p`. Polyline
/// bindings snap to their constraint polyline, surface bindings to
/// `targets[b.surface]`; fixed vertices are not handled here.
Vec3 reproject(const VertexBinding& b, const Vec3& p, const ConstraintSet& constraints,
               std::span<const ProjectionTarget> targets);

}  // namespace ambool
