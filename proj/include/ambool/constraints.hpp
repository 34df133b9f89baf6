#pragma once

#include <unordered_map>
#include <vector>

#include "ambool/tri_mesh.hpp"

namespace ambool {

/// How a vertex is allowed to move during refinement and zippering.
struct VertexBinding {
  enum class Kind { kFree, kFixed, kOnPolyline, kOnSurface };
  Kind kind = Kind::kFree;
  int id = -1;       // polyline id for kOnPolyline
  int surface = -1;  // projection target the vertex came from; -1 if none

  static VertexBinding free() { return {}; }
  static VertexBinding fixed(int surface = -1) { return {Kind::kFixed, -1, surface}; }
  static VertexBinding polyline(int id, int surface = -1) { return {Kind::kOnPolyline, id, surface}; }
  static VertexBinding on_surface(int target) { return {Kind::kOnSurface, -1, target}; }

  bool operator==(const VertexBinding&) const = default;
  /// Fixed and polyline vertices constrain the feature graph; surface
  /// bindings only ask for reprojection.
  bool is_feature() const { return kind == Kind::kFixed || kind == Kind::kOnPolyline; }
};

/// Feature-edge graph plus per-vertex movement bindings for one mesh.
///
/// Bindings are stored by vertex slot and grow lazily; untouched slots read as
/// free. Feature edges carry the id of the polyline they were chained into.
class ConstraintSet {
 public:
  std::vector<std::vector<Vec3>> polylines;

  VertexBinding binding(int v) const {
    return v >= 0 && size_t(v) < bindings_.size() ? bindings_[v] : VertexBinding{};
  }
  void set_binding(int v, VertexBinding b);

  bool is_feature_edge(const EdgeKey& e) const { return features_.count(e) != 0; }
  /// Polyline id of a feature edge, -1 when the edge is not a feature.
  int feature_polyline(const EdgeKey& e) const;
  void add_feature_edge(const EdgeKey& e, int polyline);
  void remove_feature_edge(const EdgeKey& e) { features_.erase(e); }
  const std::unordered_map<EdgeKey, int, EdgeKeyHash>& feature_edges() const { return features_; }
  size_t feature_edge_count() const { return features_.size(); }
  bool empty() const { return features_.empty() && bindings_.empty(); }

  /// Number of feature edges at `v` (scans the one-ring).
  int feature_degree(const TriMesh& mesh, int v) const;
  /// Feature-graph nodes: vertices whose feature degree is not 2.
  std::vector<int> feature_nodes(const TriMesh& mesh) const;

  /// Keeps the constraint data consistent with a split that produced `result`.
  void on_split(const TriMesh& mesh, const EdgeKey& e, const SplitResult& result);
  /// Keeps the constraint data consistent with a collapse; call after the mesh edit.
  void on_collapse(const TriMesh& mesh, const CollapseResult& result);
  /// Removes feature edges that no longer exist in the mesh.
  void prune(const TriMesh& mesh);
  /// Reindexes through a compaction map (old vertex -> new vertex or -1).
  ConstraintSet remapped(const std::vector<int>& vertex_map) const;
  /// Merges `other` reindexed through `vertex_map`. Its polyline ids move past
  /// ours and binding surfaces are shifted by `surface_offset`.
  void absorb(const ConstraintSet& other, const std::vector<int>& vertex_map, int surface_offset);

  /// Nearest point on polyline `id`.
  Vec3 project_to_polyline(int id, const Vec3& p) const;

 private:
  std::vector<VertexBinding> bindings_;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> features_;
};

/// Mesh edit operators that keep a ConstraintSet in sync. Passing nullptr
/// behaves like the bare TriMesh operator.
SplitResult split_edge(TriMesh& mesh, const EdgeKey& e, const Vec3& pos, ConstraintSet* constraints = nullptr);
CollapseResult collapse_edge(TriMesh& mesh, const EdgeKey& e, const Vec3& keep_pos, int keep = -1,
                             ConstraintSet* constraints = nullptr);
/// Rejects feature edges with Error(kPrecondition).
EdgeKey flip_edge(TriMesh& mesh, const EdgeKey& e, const ConstraintSet* constraints = nullptr);

/// Closest point to `p` on the segment [a, b].
Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p);

}  // namespace ambool
