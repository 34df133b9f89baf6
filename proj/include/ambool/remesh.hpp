#pragma once

#include <span>
#include <vector>

#include "ambool/constraints.hpp"
#include "ambool/projection.hpp"
#include "ambool/tri_mesh.hpp"

namespace ambool {

struct RemeshParams {
  double l_max = 1.0;
  double l_min = 0.4;
  double alpha = 0.5;
  double min_opening_angle = kPi / 12.0;
  bool use_curved_split = false;
  int passes = 1;
  /// Flips across a dihedral bend sharper than this are skipped so that
  /// untagged creases are not cut through.
  double max_flip_dihedral = kPi / 6.0;
  bool smooth_boundary = false;
  /// Collapses may not create edges longer than this multiple of l_max.
  double max_collapse_stretch = 1.0;

  static RemeshParams with_target(double l_max) {
    RemeshParams p;
    p.l_max = l_max;
    p.l_min = 0.4 * l_max;
    return p;
  }
  /// Throws Error(kInvalidArgument) when the invariants do not hold.
  void check() const;
};

/// Triangle set that follows the mesh through edits: children of a split
/// inherit their parent's membership.
class Region {
 public:
  Region() = default;
  Region(const TriMesh& mesh, std::span<const int> triangles);
  static Region all(const TriMesh& mesh);

  bool contains(int t) const { return t >= 0 && size_t(t) < mask_.size() && mask_[t]; }
  void add(int t);
  void remove(int t);
  /// Live member triangles, sorted.
  std::vector<int> triangles(const TriMesh& mesh) const;
  size_t size(const TriMesh& mesh) const;
  bool empty(const TriMesh& mesh) const { return size(mesh) == 0; }
  /// Adds every triangle sharing a vertex with the region.
  void grow_one_ring(const TriMesh& mesh);
  /// Vertices of live member triangles, sorted.
  std::vector<int> vertices(const TriMesh& mesh) const;
  /// Edges with at least one member triangle, sorted.
  std::vector<EdgeKey> edges(const TriMesh& mesh) const;

 private:
  std::vector<uint8_t> mask_;
};

struct RemeshStats {
  size_t splits = 0;
  size_t collapses = 0;
  size_t flips = 0;
  size_t smoothed = 0;
  size_t rejected_collapses = 0;
  size_t rejected_flips = 0;

  RemeshStats& operator+=(const RemeshStats& o);
};

/// Shared state for one set of passes. `targets` resolves on-surface bindings.
struct RemeshContext {
  TriMesh& mesh;
  Region& region;
  ConstraintSet& constraints;
  std::span<const ProjectionTarget> targets;
};

size_t split_pass(RemeshContext& ctx, const RemeshParams& params);
size_t collapse_pass(RemeshContext& ctx, const RemeshParams& params, size_t* rejected = nullptr);
size_t flip_pass(RemeshContext& ctx, const RemeshParams& params, size_t* rejected = nullptr);
size_t smooth_pass(RemeshContext& ctx, const RemeshParams& params);

/// Runs Split, Collapse, Flip, Smooth over the region `params.passes` times.
RemeshStats remesh_region(TriMesh& mesh, Region& region, const RemeshParams& params, ConstraintSet& constraints,
                          std::span<const ProjectionTarget> targets = {});

/// Position of the split vertex for edge `e`: the midpoint, or with `curved`
/// the middle of a cubic built from the endpoint normals.
Vec3 split_position(const TriMesh& mesh, const EdgeKey& e, bool curved);

/// 2 * inradius / circumradius; 1 for equilateral, 0 for degenerate.
double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c);

/// Meyer et al. mixed (Voronoi/barycentric) area around `v`.
double mixed_area(const TriMesh& mesh, int v);

}  // namespace ambool
