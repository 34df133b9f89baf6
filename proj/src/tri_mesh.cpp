#include "ambool/tri_mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ambool/error.hpp"

namespace ambool {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidEdge: return "invalid-edge";
    case ErrorCode::kInvalidVertex: return "invalid-vertex";
    case ErrorCode::kTopology: return "topology";
    case ErrorCode::kGeometry: return "geometry";
    case ErrorCode::kBoundaryEdge: return "boundary-edge";
    case ErrorCode::kDuplicateEdge: return "duplicate-edge";
    case ErrorCode::kNonManifold: return "non-manifold";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kStaleIndex: return "stale-index";
    case ErrorCode::kInvalidLoop: return "invalid-loop";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kZipperTimeout: return "zipper-timeout";
    case ErrorCode::kLoopMismatch: return "loop-mismatch";
    case ErrorCode::kAmbiguousClassification: return "ambiguous-classification";
    case ErrorCode::kEmptyPatch: return "empty-patch";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

namespace {

bool triangle_has(const Triangle& t, int v) { return t[0] == v || t[1] == v || t[2] == v; }

// Local index k such that (t[k], t[k+1]) is the edge {a, b} in either direction.
int edge_slot(const Triangle& t, const EdgeKey& e) {
  for (int k = 0; k < 3; ++k) {
    const int u = t[k];
    const int v = t[(k + 1) % 3];
    if ((u == e.a && v == e.b) || (u == e.b && v == e.a)) return k;
  }
  return -1;
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec3> positions, std::vector<Triangle> triangles) {
  positions_ = std::move(positions);
  vertex_alive_.assign(positions_.size(), 1);
  vertex_triangles_.resize(positions_.size());
  live_vertices_ = positions_.size();
  const int nv = int(positions_.size());
  for (const Triangle& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) throw Error(ErrorCode::kInvalidVertex, "triangle references missing vertex " + std::to_string(t[k]));
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error(ErrorCode::kInvalidVertex, "triangle repeats a vertex");
    }
    add_triangle(t[0], t[1], t[2]);
  }
  std::unordered_map<EdgeKey, int, EdgeKeyHash> counts;
  counts.reserve(triangles_.size() * 2);
  for (const Triangle& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      if (++counts[EdgeKey(t[k], t[(k + 1) % 3])] > 2) {
        const EdgeKey e(t[k], t[(k + 1) % 3]);
        throw Error(ErrorCode::kNonManifold,
                    "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") has more than two triangles");
      }
    }
  }
  generation_ = 0;
}

int TriMesh::add_vertex(const Vec3& p) {
  positions_.push_back(p);
  vertex_alive_.push_back(1);
  vertex_triangles_.emplace_back();
  ++live_vertices_;
  ++generation_;
  return int(positions_.size()) - 1;
}

int TriMesh::add_triangle(int a, int b, int c) {
  const int t = int(triangles_.size());
  triangles_.push_back({a, b, c});
  triangle_alive_.push_back(1);
  ++live_triangles_;
  for (int v : {a, b, c}) {
    if (!vertex_alive_[v]) {
      vertex_alive_[v] = 1;
      ++live_vertices_;
    }
  }
  attach(t);
  ++generation_;
  return t;
}

void TriMesh::attach(int t) {
  for (int v : triangles_[t]) vertex_triangles_[v].push_back(t);
}

void TriMesh::detach(int t) {
  for (int v : triangles_[t]) {
    auto& list = vertex_triangles_[v];
    auto it = std::find(list.begin(), list.end(), t);
    if (it != list.end()) list.erase(it);
  }
}

void TriMesh::kill_vertex_if_isolated(int v) {
  if (vertex_alive_[v] && vertex_triangles_[v].empty()) {
    vertex_alive_[v] = 0;
    --live_vertices_;
  }
}

void TriMesh::remove_triangle(int t) {
  if (!triangle_alive(t)) return;
  detach(t);
  triangle_alive_[t] = 0;
  --live_triangles_;
  for (int v : triangles_[t]) kill_vertex_if_isolated(v);
  ++generation_;
}

void TriMesh::replace_vertex(int from, int to) {
  if (from == to) return;
  const std::vector<int> incident = vertex_triangles_[from];
  for (int t : incident) {
    detach(t);
    Triangle& tri = triangles_[t];
    for (int& v : tri) {
      if (v == from) v = to;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      triangle_alive_[t] = 0;
      --live_triangles_;
      for (int v : tri) kill_vertex_if_isolated(v);
    } else {
      attach(t);
    }
  }
  kill_vertex_if_isolated(from);
  ++generation_;
}

Vec3 TriMesh::triangle_normal(int t) const {
  const Triangle& tri = triangles_[t];
  return ambool::triangle_normal(positions_[tri[0]], positions_[tri[1]], positions_[tri[2]]);
}

double TriMesh::triangle_area(int t) const {
  const Triangle& tri = triangles_[t];
  return ambool::triangle_area(positions_[tri[0]], positions_[tri[1]], positions_[tri[2]]);
}

Aabb TriMesh::triangle_bounds(int t) const {
  Aabb box;
  for (int v : triangles_[t]) box.extend(positions_[v]);
  return box;
}

int TriMesh::edge_triangles(const EdgeKey& e, std::array<int, 2>& out) const {
  if (!vertex_alive(e.a) || !vertex_alive(e.b)) return 0;
  const auto& la = vertex_triangles_[e.a];
  const auto& lb = vertex_triangles_[e.b];
  const auto& shorter = la.size() <= lb.size() ? la : lb;
  const int other = la.size() <= lb.size() ? e.b : e.a;
  int count = 0;
  for (int t : shorter) {
    if (triangle_has(triangles_[t], other)) {
      if (count < 2) out[count] = t;
      ++count;
    }
  }
  return count;
}

bool TriMesh::has_edge(int a, int b) const {
  std::array<int, 2> out{};
  return a != b && edge_triangles(EdgeKey(a, b), out) > 0;
}

bool TriMesh::is_boundary_edge(const EdgeKey& e) const {
  std::array<int, 2> out{};
  return edge_triangles(e, out) == 1;
}

bool TriMesh::is_boundary_vertex(int v) const {
  for (int t : vertex_triangles_[v]) {
    const Triangle& tri = triangles_[t];
    for (int u : tri) {
      if (u != v && is_boundary_edge(EdgeKey(u, v))) return true;
    }
  }
  return false;
}

int TriMesh::opposite_vertex(int t, const EdgeKey& e) const {
  for (int v : triangles_[t]) {
    if (!e.contains(v)) return v;
  }
  return -1;
}

std::vector<int> TriMesh::vertex_neighbors(int v) const {
  std::vector<int> out;
  for (int t : vertex_triangles_[v]) {
    for (int u : triangles_[t]) {
      if (u != v && std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
    }
  }
  return out;
}

std::vector<EdgeKey> TriMesh::edges() const {
  std::vector<EdgeKey> out;
  out.reserve(live_triangles_ * 3 / 2 + 8);
  for (size_t t = 0; t < triangles_.size(); ++t) {
    if (!triangle_alive_[t]) continue;
    const Triangle& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int u = tri[k];
      const int v = tri[(k + 1) % 3];
      // Each edge is reported by its lowest-indexed triangle.
      std::array<int, 2> inc{};
      const int n = edge_triangles(EdgeKey(u, v), inc);
      int lowest = int(t);
      if (n >= 1) lowest = std::min(inc[0], n >= 2 ? inc[1] : inc[0]);
      if (lowest == int(t)) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<int> TriMesh::live_triangles() const {
  std::vector<int> out;
  out.reserve(live_triangles_);
  for (size_t t = 0; t < triangles_.size(); ++t) {
    if (triangle_alive_[t]) out.push_back(int(t));
  }
  return out;
}

std::vector<int> TriMesh::live_vertices() const {
  std::vector<int> out;
  out.reserve(live_vertices_);
  for (size_t v = 0; v < positions_.size(); ++v) {
    if (vertex_alive_[v]) out.push_back(int(v));
  }
  return out;
}

Vec3 TriMesh::vertex_normal(int v) const {
  Vec3 n;
  for (int t : vertex_triangles_[v]) {
    const Triangle& tri = triangles_[t];
    n += triangle_cross(positions_[tri[0]], positions_[tri[1]], positions_[tri[2]]);
  }
  return normalized(n);
}

SplitResult TriMesh::split_edge(const EdgeKey& e, const Vec3& pos) {
  if (e.a == e.b || !vertex_alive(e.a) || !vertex_alive(e.b)) {
    throw Error(ErrorCode::kInvalidEdge, "split of dead or unknown edge");
  }
  std::array<int, 2> inc{};
  const int n = edge_triangles(e, inc);
  if (n == 0) throw Error(ErrorCode::kInvalidEdge, "split of dead or unknown edge");
  if (n > 2) throw Error(ErrorCode::kNonManifold, "split of non-manifold edge");

  SplitResult result;
  result.vertex = add_vertex(pos);
  const int m = result.vertex;
  for (int i = 0; i < n; ++i) {
    const int t = inc[i];
    const Triangle tri = triangles_[t];
    const int k = edge_slot(tri, e);
    const int x = tri[k];
    const int y = tri[(k + 1) % 3];
    const int z = tri[(k + 2) % 3];
    detach(t);
    triangles_[t] = {x, m, z};
    attach(t);
    const int nt = add_triangle(m, y, z);
    result.new_triangles[i] = nt;
    result.parents[i] = t;
  }
  result.new_count = n;
  ++generation_;
  return result;
}

bool TriMesh::link_condition(const EdgeKey& e, int keep, std::string* why) const {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  std::array<int, 2> inc{};
  const int n = edge_triangles(e, inc);
  if (n == 0) return fail("edge is not live");
  if (n > 2) return fail("non-manifold edge");
  std::vector<int> opposite;
  for (int i = 0; i < n; ++i) opposite.push_back(opposite_vertex(inc[i], e));

  std::vector<int> na = vertex_neighbors(e.a);
  std::vector<int> nb = vertex_neighbors(e.b);
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  std::vector<int> common;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
  std::vector<int> opp_sorted = opposite;
  std::sort(opp_sorted.begin(), opp_sorted.end());
  if (common != opp_sorted) return fail("endpoints share a non-opposing neighbor");

  if (n == 2) {
    // Both endpoints bounding a common link edge (tetrahedron-like configuration).
    const int c = opposite[0];
    const int d = opposite[1];
    auto has_face = [&](int p, int q, int r) {
      for (int t : vertex_triangles_[p]) {
        if (triangle_has(triangles_[t], q) && triangle_has(triangles_[t], r)) return true;
      }
      return false;
    };
    if (has_face(e.a, c, d) && has_face(e.b, c, d)) return fail("collapse would create a doubled face");
    if (is_boundary_vertex(e.a) && is_boundary_vertex(e.b)) return fail("interior edge joins two boundary vertices");
  }
  for (int c : opposite) {
    if (vertex_triangles_[c].size() <= 1) return fail("opposing vertex would become isolated");
  }
  const size_t remaining = vertex_triangles_[e.a].size() + vertex_triangles_[e.b].size() - 2 * size_t(n);
  if (remaining == 0) return fail("collapse would remove the whole component");
  (void)keep;
  return true;
}

bool TriMesh::can_collapse(const EdgeKey& e, const Vec3& keep_pos, int keep, std::string* why) const {
  if (e.a == e.b || !vertex_alive(e.a) || !vertex_alive(e.b)) {
    if (why) *why = "dead edge";
    return false;
  }
  if (keep == -1) keep = e.a;
  if (!link_condition(e, keep, why)) return false;
  const int removed = e.other(keep);
  for (int v : {keep, removed}) {
    for (int t : vertex_triangles_[v]) {
      const Triangle& tri = triangles_[t];
      if (triangle_has(tri, keep) && triangle_has(tri, removed)) continue;
      std::array<Vec3, 3> before = triangle_points(t);
      std::array<Vec3, 3> after = before;
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == keep || tri[k] == removed) after[k] = keep_pos;
      }
      const Vec3 nb = triangle_cross(before[0], before[1], before[2]);
      const Vec3 na = triangle_cross(after[0], after[1], after[2]);
      if (dot(nb, na) <= 0.0) {
        if (why) *why = "triangle normal would flip";
        return false;
      }
    }
  }
  return true;
}

CollapseResult TriMesh::collapse_edge(const EdgeKey& e, const Vec3& keep_pos, int keep) {
  if (e.a == e.b || !vertex_alive(e.a) || !vertex_alive(e.b)) {
    throw Error(ErrorCode::kInvalidEdge, "collapse of dead or unknown edge");
  }
  std::array<int, 2> inc{};
  const int n = edge_triangles(e, inc);
  if (n == 0) throw Error(ErrorCode::kInvalidEdge, "collapse of dead or unknown edge");
  if (keep == -1) keep = e.a;
  if (!e.contains(keep)) throw Error(ErrorCode::kInvalidVertex, "kept vertex is not an edge endpoint");
  std::string why;
  if (!link_condition(e, keep, &why)) throw Error(ErrorCode::kTopology, "collapse rejected: " + why);
  if (!can_collapse(e, keep_pos, keep, &why)) throw Error(ErrorCode::kGeometry, "collapse rejected: " + why);

  CollapseResult result;
  result.kept = keep;
  result.removed = e.other(keep);
  for (int i = 0; i < n && i < 2; ++i) {
    result.removed_triangles[i] = inc[i];
    detach(inc[i]);
    triangle_alive_[inc[i]] = 0;
    --live_triangles_;
  }
  const std::vector<int> incident = vertex_triangles_[result.removed];
  for (int t : incident) {
    detach(t);
    for (int& v : triangles_[t]) {
      if (v == result.removed) v = keep;
    }
    attach(t);
  }
  vertex_triangles_[result.removed].clear();
  kill_vertex_if_isolated(result.removed);
  positions_[keep] = keep_pos;
  ++generation_;
  return result;
}

EdgeKey TriMesh::flip_edge(const EdgeKey& e) {
  std::array<int, 2> inc{};
  const int n = edge_triangles(e, inc);
  if (n == 0) throw Error(ErrorCode::kInvalidEdge, "flip of dead or unknown edge");
  if (n == 1) throw Error(ErrorCode::kBoundaryEdge, "flip of boundary edge");
  if (n > 2) throw Error(ErrorCode::kNonManifold, "flip of non-manifold edge");

  // Orient so that inc[0] traverses p -> q.
  int t0 = inc[0];
  int t1 = inc[1];
  int k = edge_slot(triangles_[t0], e);
  int p = triangles_[t0][k];
  int q = triangles_[t0][(k + 1) % 3];
  const int c = triangles_[t0][(k + 2) % 3];
  const int d = opposite_vertex(t1, e);
  if (c == d || has_edge(c, d)) throw Error(ErrorCode::kDuplicateEdge, "flip would duplicate an existing edge");

  const Vec3 old_normal = triangle_cross(positions_[p], positions_[q], positions_[c]) +
                          triangle_cross(positions_[q], positions_[p], positions_[d]);
  const Vec3 n0 = triangle_cross(positions_[c], positions_[p], positions_[d]);
  const Vec3 n1 = triangle_cross(positions_[d], positions_[q], positions_[c]);
  if (dot(n0, old_normal) <= 0.0 || dot(n1, old_normal) <= 0.0) {
    throw Error(ErrorCode::kGeometry, "flip would invert a triangle");
  }
  detach(t0);
  detach(t1);
  triangles_[t0] = {c, p, d};
  triangles_[t1] = {d, q, c};
  attach(t0);
  attach(t1);
  ++generation_;
  return EdgeKey(c, d);
}

void TriMesh::flip_triangle(int t) {
  std::swap(triangles_[t][1], triangles_[t][2]);
  ++generation_;
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (size_t v = 0; v < positions_.size(); ++v) {
    if (vertex_alive_[v]) box.extend(positions_[v]);
  }
  return box;
}

TriMesh TriMesh::compacted(std::vector<int>* vertex_map, std::vector<int>* triangle_map) const {
  std::vector<int> vmap(positions_.size(), -1);
  std::vector<Vec3> pos;
  pos.reserve(live_vertices_);
  for (size_t v = 0; v < positions_.size(); ++v) {
    if (vertex_alive_[v]) {
      vmap[v] = int(pos.size());
      pos.push_back(positions_[v]);
    }
  }
  TriMesh out;
  out.positions_ = std::move(pos);
  out.vertex_alive_.assign(out.positions_.size(), 1);
  out.vertex_triangles_.resize(out.positions_.size());
  out.live_vertices_ = out.positions_.size();
  std::vector<int> tmap(triangles_.size(), -1);
  for (size_t t = 0; t < triangles_.size(); ++t) {
    if (!triangle_alive_[t]) continue;
    const Triangle& tri = triangles_[t];
    tmap[t] = out.add_triangle(vmap[tri[0]], vmap[tri[1]], vmap[tri[2]]);
  }
  out.generation_ = 0;
  if (vertex_map) *vertex_map = std::move(vmap);
  if (triangle_map) *triangle_map = std::move(tmap);
  return out;
}

std::vector<int> TriMesh::append(const TriMesh& other) {
  std::vector<int> vmap(other.positions_.size(), -1);
  for (size_t v = 0; v < other.positions_.size(); ++v) {
    if (other.vertex_alive_[v]) vmap[v] = add_vertex(other.positions_[v]);
  }
  for (size_t t = 0; t < other.triangles_.size(); ++t) {
    if (!other.triangle_alive_[t]) continue;
    const Triangle& tri = other.triangles_[t];
    add_triangle(vmap[tri[0]], vmap[tri[1]], vmap[tri[2]]);
  }
  return vmap;
}

namespace {

struct HalfEdge {
  int from;
  int to;
  int tri;
};

// Successor of boundary half-edge (u -> v) in triangle t, found by rotating
// around v through the fan that contains t.
HalfEdge next_boundary(const TriMesh& mesh, const HalfEdge& h) {
  int cur = h.tri;
  const int v = h.to;
  const size_t cap = mesh.vertex_triangles(v).size() + 2;
  for (size_t step = 0; step < cap; ++step) {
    const Triangle& tri = mesh.triangle(cur);
    int k = 0;
    while (tri[k] != v) ++k;
    const int w = tri[(k + 1) % 3];
    std::array<int, 2> inc{};
    const int n = mesh.edge_triangles(EdgeKey(v, w), inc);
    if (n == 1) return {v, w, cur};
    cur = inc[0] == cur ? inc[1] : inc[0];
  }
  return {-1, -1, -1};
}

}  // namespace

BoundaryLoop trace_boundary_loop(const TriMesh& mesh, int v) {
  BoundaryLoop loop;
  if (!mesh.vertex_alive(v)) return loop;
  HalfEdge h{-1, -1, -1};
  for (int t : mesh.vertex_triangles(v)) {
    const Triangle& tri = mesh.triangle(t);
    int k = 0;
    while (tri[k] != v) ++k;
    if (mesh.is_boundary_edge(EdgeKey(v, tri[(k + 1) % 3]))) {
      h = {v, tri[(k + 1) % 3], t};
      break;
    }
  }
  if (h.tri < 0) return loop;
  const HalfEdge start = h;
  const size_t cap = mesh.vertex_slots() + 1;
  for (size_t guard = 0; guard < cap; ++guard) {
    loop.vertices.push_back(h.from);
    h = next_boundary(mesh, h);
    if (h.tri < 0) break;
    if (h.from == start.from && h.to == start.to && h.tri == start.tri) break;
  }
  return loop;
}

std::vector<BoundaryLoop> boundary_loops(const TriMesh& mesh) {
  std::vector<BoundaryLoop> loops;
  std::unordered_set<long> visited;
  for (size_t t = 0; t < mesh.triangle_slots(); ++t) {
    if (!mesh.triangle_alive(int(t))) continue;
    const Triangle& tri = mesh.triangle(int(t));
    for (int k = 0; k < 3; ++k) {
      const long key = long(t) * 3 + k;
      if (visited.count(key)) continue;
      const EdgeKey e(tri[k], tri[(k + 1) % 3]);
      if (!mesh.is_boundary_edge(e)) continue;
      BoundaryLoop loop;
      HalfEdge h{tri[k], tri[(k + 1) % 3], int(t)};
      const HalfEdge start = h;
      const size_t cap = mesh.vertex_slots() + 1;
      for (size_t guard = 0; guard < cap; ++guard) {
        const Triangle& ht = mesh.triangle(h.tri);
        int hk = 0;
        while (ht[hk] != h.from) ++hk;
        visited.insert(long(h.tri) * 3 + hk);
        loop.vertices.push_back(h.from);
        h = next_boundary(mesh, h);
        if (h.tri < 0) break;
        if (h.from == start.from && h.to == start.to && h.tri == start.tri) break;
      }
      loops.push_back(std::move(loop));
    }
  }
  return loops;
}

bool is_bowtie(const TriMesh& mesh, int v) {
  const auto tris = mesh.vertex_triangles(v);
  if (tris.size() <= 1) return false;
  std::vector<int> parent(tris.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (size_t i = 0; i < tris.size(); ++i) {
    for (size_t j = i + 1; j < tris.size(); ++j) {
      const Triangle& ti = mesh.triangle(tris[i]);
      const Triangle& tj = mesh.triangle(tris[j]);
      for (int u : ti) {
        if (u != v && (tj[0] == u || tj[1] == u || tj[2] == u)) {
          parent[find(int(i))] = find(int(j));
        }
      }
    }
  }
  int roots = 0;
  for (size_t i = 0; i < tris.size(); ++i) roots += find(int(i)) == int(i);
  return roots > 1;
}

long euler_characteristic(const TriMesh& mesh) {
  return long(mesh.vertex_count()) - long(mesh.edges().size()) + long(mesh.triangle_count());
}

OneRing one_ring(const TriMesh& mesh, int v) {
  OneRing ring;
  const auto tris = mesh.vertex_triangles(v);
  ring.triangles.assign(tris.begin(), tris.end());
  std::sort(ring.triangles.begin(), ring.triangles.end());
  ring.vertices = mesh.vertex_neighbors(v);
  std::sort(ring.vertices.begin(), ring.vertices.end());
  return ring;
}

std::vector<Diagnostic> validate(const TriMesh& mesh) {
  std::vector<Diagnostic> out;
  std::map<std::pair<int, int>, int> directed;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> undirected;
  std::vector<std::vector<int>> rebuilt(mesh.vertex_slots());
  for (size_t t = 0; t < mesh.triangle_slots(); ++t) {
    if (!mesh.triangle_alive(int(t))) continue;
    const Triangle& tri = mesh.triangle(int(t));
    bool dangling = false;
    for (int v : tri) {
      if (!mesh.vertex_alive(v)) dangling = true;
    }
    if (dangling) {
      out.push_back({Diagnostic::Kind::kDanglingReference, "triangle " + std::to_string(t) + " references a dead vertex"});
      continue;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      out.push_back({Diagnostic::Kind::kRepeatedVertex, "triangle " + std::to_string(t) + " repeats a vertex"});
      continue;
    }
    for (int v : tri) rebuilt[v].push_back(int(t));
    for (int k = 0; k < 3; ++k) {
      const int u = tri[k];
      const int w = tri[(k + 1) % 3];
      if (++directed[{u, w}] == 2) {
        out.push_back({Diagnostic::Kind::kOrientationConflict,
                       "edge " + std::to_string(u) + "->" + std::to_string(w) + " traversed twice in the same direction"});
      }
      if (++undirected[EdgeKey(u, w)] == 3) {
        out.push_back({Diagnostic::Kind::kNonManifoldEdge,
                       "edge (" + std::to_string(std::min(u, w)) + "," + std::to_string(std::max(u, w)) + ") has more than two triangles"});
      }
    }
  }
  for (size_t v = 0; v < mesh.vertex_slots(); ++v) {
    if (!mesh.vertex_alive(int(v))) {
      if (!mesh.vertex_triangles(int(v)).empty()) {
        out.push_back({Diagnostic::Kind::kAdjacencyMismatch, "dead vertex " + std::to_string(v) + " has incident triangles"});
      }
      continue;
    }
    std::vector<int> have(mesh.vertex_triangles(int(v)).begin(), mesh.vertex_triangles(int(v)).end());
    std::sort(have.begin(), have.end());
    if (have != rebuilt[v]) {
      out.push_back({Diagnostic::Kind::kAdjacencyMismatch, "vertex " + std::to_string(v) + " adjacency disagrees with rebuild"});
    }
  }
  return out;
}

std::vector<std::vector<int>> connected_components(const TriMesh& mesh) {
  const size_t n = mesh.triangle_slots();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (size_t t = 0; t < n; ++t) {
    if (!mesh.triangle_alive(int(t))) continue;
    const Triangle& tri = mesh.triangle(int(t));
    for (int k = 0; k < 3; ++k) {
      std::array<int, 2> inc{};
      if (mesh.edge_triangles(EdgeKey(tri[k], tri[(k + 1) % 3]), inc) >= 2) {
        const int a = find(inc[0]);
        const int b = find(inc[1]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<int, std::vector<int>> groups;
  for (size_t t = 0; t < n; ++t) {
    if (mesh.triangle_alive(int(t))) groups[find(int(t))].push_back(int(t));
  }
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, tris] : groups) out.push_back(std::move(tris));
  return out;
}

}  // namespace ambool
