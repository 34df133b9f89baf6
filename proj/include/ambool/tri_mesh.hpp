#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ambool/vec3.hpp"

namespace ambool {

/// Unordered pair of distinct vertex indices.
struct EdgeKey {
  int a = -1;
  int b = -1;

  EdgeKey() = default;
  EdgeKey(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}

  bool operator==(const EdgeKey&) const = default;
  bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
  int other(int v) const { return v == a ? b : a; }
  bool contains(int v) const { return v == a || v == b; }
};

struct EdgeKeyHash {
  size_t operator()(const EdgeKey& e) const noexcept {
    return std::hash<uint64_t>{}((uint64_t(uint32_t(e.a)) << 32) | uint32_t(e.b));
  }
};

using Triangle = std::array<int, 3>;

struct SplitResult {
  int vertex = -1;
  // Triangles created by the split; each child's parent is the triangle that
  // previously occupied the same slot or, for appended slots, `parents`.
  std::array<int, 2> new_triangles{-1, -1};
  std::array<int, 2> parents{-1, -1};
  int new_count = 0;
};

struct CollapseResult {
  int kept = -1;
  int removed = -1;
  std::array<int, 2> removed_triangles{-1, -1};
};

/// Indexed triangle mesh with per-vertex incident-triangle lists.
///
/// Elements are never compacted by the edit operators: removed vertices and
/// triangles are marked dead and their slots stay reserved, so indices held by
/// callers stay valid until `compacted()` is used. `generation()` is bumped on
/// every edit, including position changes.
class TriMesh {
 public:
  TriMesh() = default;

  /// Builds a mesh and its adjacency. Throws Error(kInvalidVertex) on
  /// out-of-range or repeated indices and Error(kNonManifold) when an edge is
  /// shared by more than two triangles.
  TriMesh(std::vector<Vec3> positions, std::vector<Triangle> triangles);

  int add_vertex(const Vec3& p);
  /// Appends a triangle without manifold checks; orientation is the caller's.
  int add_triangle(int a, int b, int c);
  /// Marks the triangle dead; vertices left without triangles die with it.
  void remove_triangle(int t);
  /// Redirects every reference of `from` to `to` and kills `from`. Triangles
  /// that would reference `to` twice are removed.
  void replace_vertex(int from, int to);

  size_t vertex_slots() const { return positions_.size(); }
  size_t triangle_slots() const { return triangles_.size(); }
  size_t vertex_count() const { return live_vertices_; }
  size_t triangle_count() const { return live_triangles_; }
  bool empty() const { return live_triangles_ == 0; }

  bool vertex_alive(int v) const {
    return v >= 0 && size_t(v) < vertex_alive_.size() && vertex_alive_[v];
  }
  bool triangle_alive(int t) const {
    return t >= 0 && size_t(t) < triangle_alive_.size() && triangle_alive_[t];
  }

  const Vec3& position(int v) const { return positions_[v]; }
  void set_position(int v, const Vec3& p) {
    positions_[v] = p;
    ++generation_;
  }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  std::array<Vec3, 3> triangle_points(int t) const {
    const Triangle& tri = triangles_[t];
    return {positions_[tri[0]], positions_[tri[1]], positions_[tri[2]]};
  }
  Vec3 triangle_normal(int t) const;
  double triangle_area(int t) const;
  Aabb triangle_bounds(int t) const;
  std::span<const int> vertex_triangles(int v) const { return vertex_triangles_[v]; }

  /// Number of live triangles on the edge; the first two are written to `out`.
  int edge_triangles(const EdgeKey& e, std::array<int, 2>& out) const;
  bool has_edge(int a, int b) const;
  bool is_boundary_edge(const EdgeKey& e) const;
  bool is_boundary_vertex(int v) const;
  double edge_length(const EdgeKey& e) const { return distance(positions_[e.a], positions_[e.b]); }
  /// Vertex opposite edge `e` in triangle `t`.
  int opposite_vertex(int t, const EdgeKey& e) const;

  std::vector<int> vertex_neighbors(int v) const;
  std::vector<EdgeKey> edges() const;
  std::vector<int> live_triangles() const;
  std::vector<int> live_vertices() const;
  /// Area-weighted vertex normal.
  Vec3 vertex_normal(int v) const;

  /// Splits edge `e` with a new vertex at `pos`. Interior edges turn two
  /// triangles into four, boundary edges one into two. Throws
  /// Error(kInvalidEdge) for a dead or unknown edge.
  SplitResult split_edge(const EdgeKey& e, const Vec3& pos);

  /// Merges the endpoints of `e` into `keep` (defaults to e.a) placed at
  /// `keep_pos`. Throws Error(kTopology) when the link condition fails and
  /// Error(kGeometry) when a surviving triangle normal would turn by 90 degrees
  /// or more.
  CollapseResult collapse_edge(const EdgeKey& e, const Vec3& keep_pos, int keep = -1);
  /// Checks the same conditions as collapse_edge without editing.
  bool can_collapse(const EdgeKey& e, const Vec3& keep_pos, int keep, std::string* why = nullptr) const;

  /// Replaces the diagonal `e` by the one joining its opposing vertices.
  /// Throws kBoundaryEdge, kDuplicateEdge or kGeometry.
  EdgeKey flip_edge(const EdgeKey& e);

  /// Reverses the winding of a live triangle.
  void flip_triangle(int t);

  uint64_t generation() const { return generation_; }
  Aabb bounds() const;

  /// Copy without dead elements. Optional maps give old -> new index (-1 for dead).
  TriMesh compacted(std::vector<int>* vertex_map = nullptr, std::vector<int>* triangle_map = nullptr) const;
  /// Appends all live elements of `other`; returns the vertex index offset map.
  std::vector<int> append(const TriMesh& other);

 private:
  bool link_condition(const EdgeKey& e, int keep, std::string* why) const;
  void attach(int t);
  void detach(int t);
  void kill_vertex_if_isolated(int v);

  std::vector<Vec3> positions_;
  std::vector<Triangle> triangles_;
  std::vector<uint8_t> vertex_alive_;
  std::vector<uint8_t> triangle_alive_;
  std::vector<std::vector<int>> vertex_triangles_;
  size_t live_vertices_ = 0;
  size_t live_triangles_ = 0;
  uint64_t generation_ = 0;
};

/// Ordered cycle of boundary vertices. Walking the loop keeps the mesh
/// interior on the left when viewed against the surface normal.
struct BoundaryLoop {
  std::vector<int> vertices;
  int source = -1;  // which input mesh the loop came from, when known
  int patch = -1;

  size_t size() const { return vertices.size(); }
  int at(long i) const {
    const long n = long(vertices.size());
    return vertices[size_t(((i % n) + n) % n)];
  }
};

std::vector<BoundaryLoop> boundary_loops(const TriMesh& mesh);
/// The boundary loop through boundary vertex `v`, starting at `v`; empty when
/// `v` is not on a boundary.
BoundaryLoop trace_boundary_loop(const TriMesh& mesh, int v);
bool is_bowtie(const TriMesh& mesh, int v);
long euler_characteristic(const TriMesh& mesh);

struct OneRing {
  std::vector<int> vertices;
  std::vector<int> triangles;
};
OneRing one_ring(const TriMesh& mesh, int v);

struct Diagnostic {
  enum class Kind {
    kDanglingReference,
    kRepeatedVertex,
    kNonManifoldEdge,
    kOrientationConflict,
    kAdjacencyMismatch,
  };
  Kind kind;
  std::string message;
};

/// Structural defects of the mesh; empty when the mesh is valid.
std::vector<Diagnostic> validate(const TriMesh& mesh);

/// Edge-connected components of the live triangles (sorted triangle lists,
/// components ordered by smallest triangle id).
std::vector<std::vector<int>> connected_components(const TriMesh& mesh);

}  // namespace ambool
