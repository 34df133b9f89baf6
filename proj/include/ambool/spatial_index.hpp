#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ambool/geometry.hpp"
#include "ambool/tri_mesh.hpp"

namespace ambool {

/// Sparse octree over triangle bounding boxes.
///
/// A triangle is registered in every leaf its box overlaps. The index records
/// the mesh generation it was built against; queries against a mesh that has
/// since been edited throw Error(kStaleIndex) until `update_region` or a
/// rebuild brings it up to date.
class SpatialIndex {
 public:
  struct Options {
    int leaf_capacity = 16;
    int max_depth = 10;
  };

  SpatialIndex() = default;
  static SpatialIndex build(const TriMesh& mesh, Options options);
  static SpatialIndex build(const TriMesh& mesh) { return build(mesh, Options{}); }

  /// Re-registers only the listed triangles (new, moved or dead) and adopts
  /// the mesh's current generation. Falls back to a rebuild when a triangle
  /// leaves the root box.
  void update_region(const TriMesh& mesh, std::span<const int> changed);

  void check_current(const TriMesh& mesh) const;
  uint64_t generation() const { return generation_; }
  size_t entry_count() const { return registered_; }

  /// Triangles whose registered box overlaps `box`, sorted ascending.
  std::vector<int> query_box(const TriMesh& mesh, const Aabb& box) const;

  // Traversal hooks used by the free query functions.
  struct Node {
    Aabb box;
    int first_child = -1;  // eight consecutive children, or -1 for a leaf
    int depth = 0;
    std::vector<int> triangles;
  };
  const std::vector<Node>& nodes() const { return nodes_; }
  const Aabb& triangle_box(int t) const { return boxes_[t]; }

 private:
  void insert(int node, int t);
  void remove(int node, int t);
  void split(int node);
  void rebuild(const TriMesh& mesh);

  Options options_;
  std::vector<Node> nodes_;
  std::vector<Aabb> boxes_;
  std::vector<uint8_t> registered_flag_;
  size_t registered_ = 0;
  uint64_t generation_ = 0;
};

struct NearestResult {
  Vec3 point;
  int triangle = -1;
  double distance = 0.0;
};

/// Closest point on the live surface; ties go to the lowest triangle id.
NearestResult nearest_point(const SpatialIndex& index, const TriMesh& mesh, const Vec3& q);

enum class Facing { kFront, kBack };

struct RayHit {
  double t = 0.0;
  int triangle = -1;
  Facing facing = Facing::kFront;
  bool unreliable = false;
};

/// All hits along the ray sorted by t (then triangle id). `facing` is kBack
/// when the ray travels along the triangle normal, i.e. strikes its inside.
std::vector<RayHit> ray_hits(const SpatialIndex& index, const TriMesh& mesh, const Ray& ray);

/// Pairs (triangle of A, triangle of B) that pass tri_tri_intersect at
/// `tolerance`, sorted. Degenerate triangles are skipped.
std::vector<std::pair<int, int>> intersecting_pairs(const SpatialIndex& index_a, const TriMesh& mesh_a,
                                                    const SpatialIndex& index_b, const TriMesh& mesh_b,
                                                    double tolerance);

/// Intersection segments for the given pairs (coplanar pairs omitted).
std::vector<IntersectionSegment> intersection_segments(const TriMesh& mesh_a, const TriMesh& mesh_b,
                                                       std::span<const std::pair<int, int>> pairs);

}  // namespace ambool
