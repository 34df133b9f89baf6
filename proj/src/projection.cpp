#include "ambool/projection.hpp"

#include <limits>

namespace ambool {

ProjectionTarget ProjectionTarget::mesh(TriMesh mesh) {
  auto snapshot = std::make_shared<const TriMesh>(std::move(mesh));
  auto index = std::make_shared<const SpatialIndex>(SpatialIndex::build(*snapshot));
  return ProjectionTarget(MeshSurface{std::move(snapshot), std::move(index)});
}

Vec3 closest_point_on_polyline(std::span<const Vec3> points, const Vec3& p) {
  if (points.empty()) return p;
  if (points.size() == 1) return points[0];
  Vec3 best = points[0];
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const Vec3 q = closest_point_on_segment(points[i], points[i + 1], p);
    const double d = distance_squared(p, q);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

Vec3 ProjectionTarget::project(const Vec3& p) const {
  struct Visitor {
    const Vec3& p;
    Vec3 operator()(std::monostate) const { return p; }
    Vec3 operator()(const MeshSurface& s) const {
      const NearestResult r = nearest_point(*s.index, *s.mesh, p);
      return r.triangle >= 0 ? r.point : p;
    }
    Vec3 operator()(const PolylineCurve& c) const { return closest_point_on_polyline(c.points, p); }
    Vec3 operator()(const Sphere& s) const {
      const Vec3 d = p - s.center;
      const double len = length(d);
      if (len == 0.0) return s.center + Vec3{s.radius, 0, 0};
      return s.center + d * (s.radius / len);
    }
    Vec3 operator()(const Plane& pl) const { return p - pl.normal * dot(p - pl.point, pl.normal); }
  };
  return std::visit(Visitor{p}, target_);
}

Vec3 reproject(const VertexBinding& b, const Vec3& p, const ConstraintSet& constraints,
               std::span<const ProjectionTarget> targets) {
  switch (b.kind) {
    case VertexBinding::Kind::kOnPolyline:
      return constraints.project_to_polyline(b.id, p);
    case VertexBinding::Kind::kOnSurface:
      if (b.surface >= 0 && size_t(b.surface) < targets.size()) return targets[b.surface].project(p);
      return p;
    default:
      return p;
  }
}

}  // namespace ambool
