#include "ambool/constraints.hpp"

#include <algorithm>
#include <limits>

#include "ambool/error.hpp"

namespace ambool {

Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double len2 = length_squared(ab);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

void ConstraintSet::set_binding(int v, VertexBinding b) {
  if (size_t(v) >= bindings_.size()) {
    if (b == VertexBinding{}) return;
    bindings_.resize(size_t(v) + 1);
  }
  bindings_[v] = b;
}

int ConstraintSet::feature_polyline(const EdgeKey& e) const {
  auto it = features_.find(e);
  return it == features_.end() ? -1 : it->second;
}

void ConstraintSet::add_feature_edge(const EdgeKey& e, int polyline) { features_[e] = polyline; }

int ConstraintSet::feature_degree(const TriMesh& mesh, int v) const {
  if (features_.empty()) return 0;
  int degree = 0;
  for (int u : mesh.vertex_neighbors(v)) degree += is_feature_edge(EdgeKey(u, v));
  return degree;
}

std::vector<int> ConstraintSet::feature_nodes(const TriMesh& mesh) const {
  std::vector<int> touched;
  for (const auto& [e, id] : features_) {
    touched.push_back(e.a);
    touched.push_back(e.b);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::vector<int> nodes;
  for (int v : touched) {
    if (mesh.vertex_alive(v) && feature_degree(mesh, v) != 2) nodes.push_back(v);
  }
  return nodes;
}

void ConstraintSet::on_split(const TriMesh& mesh, const EdgeKey& e, const SplitResult& result) {
  (void)mesh;
  const int m = result.vertex;
  const VertexBinding ba = binding(e.a);
  const VertexBinding bb = binding(e.b);
  const int surface = ba.surface >= 0 ? ba.surface : bb.surface;
  auto it = features_.find(e);
  if (it != features_.end()) {
    const int pid = it->second;
    features_.erase(it);
    features_[EdgeKey(e.a, m)] = pid;
    features_[EdgeKey(m, e.b)] = pid;
    set_binding(m, VertexBinding::polyline(pid, surface));
    return;
  }
  if (surface >= 0) {
    set_binding(m, VertexBinding::on_surface(surface));
  } else {
    set_binding(m, VertexBinding::free());
  }
}

void ConstraintSet::on_collapse(const TriMesh& mesh, const CollapseResult& result) {
  const int k = result.kept;
  const int r = result.removed;
  features_.erase(EdgeKey(k, r));
  if (!features_.empty()) {
    for (int x : mesh.vertex_neighbors(k)) {
      auto it = features_.find(EdgeKey(r, x));
      if (it == features_.end()) continue;
      const int pid = it->second;
      features_.erase(it);
      features_.emplace(EdgeKey(k, x), pid);
    }
  }
  if (size_t(r) < bindings_.size()) bindings_[r] = VertexBinding{};
}

void ConstraintSet::prune(const TriMesh& mesh) {
  for (auto it = features_.begin(); it != features_.end();) {
    if (!mesh.has_edge(it->first.a, it->first.b)) {
      it = features_.erase(it);
    } else {
      ++it;
    }
  }
}

ConstraintSet ConstraintSet::remapped(const std::vector<int>& vertex_map) const {
  ConstraintSet out;
  out.polylines = polylines;
  for (size_t v = 0; v < bindings_.size() && v < vertex_map.size(); ++v) {
    if (vertex_map[v] >= 0) out.set_binding(vertex_map[v], bindings_[v]);
  }
  for (const auto& [e, id] : features_) {
    if (size_t(e.a) >= vertex_map.size() || size_t(e.b) >= vertex_map.size()) continue;
    const int a = vertex_map[e.a];
    const int b = vertex_map[e.b];
    if (a >= 0 && b >= 0 && a != b) out.features_[EdgeKey(a, b)] = id;
  }
  return out;
}

void ConstraintSet::absorb(const ConstraintSet& other, const std::vector<int>& vertex_map, int surface_offset) {
  const int base = int(polylines.size());
  polylines.insert(polylines.end(), other.polylines.begin(), other.polylines.end());
  for (size_t v = 0; v < other.bindings_.size() && v < vertex_map.size(); ++v) {
    if (vertex_map[v] < 0) continue;
    VertexBinding b = other.bindings_[v];
    if (b.kind == VertexBinding::Kind::kOnPolyline) b.id += base;
    if (b.surface >= 0) b.surface += surface_offset;
    set_binding(vertex_map[v], b);
  }
  for (const auto& [e, id] : other.features_) {
    if (size_t(e.a) >= vertex_map.size() || size_t(e.b) >= vertex_map.size()) continue;
    const int a = vertex_map[e.a];
    const int b = vertex_map[e.b];
    if (a >= 0 && b >= 0 && a != b) features_[EdgeKey(a, b)] = id + base;
  }
}

Vec3 ConstraintSet::project_to_polyline(int id, const Vec3& p) const {
  if (id < 0 || size_t(id) >= polylines.size() || polylines[id].empty()) return p;
  const auto& line = polylines[id];
  if (line.size() == 1) return line[0];
  Vec3 best = line[0];
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec3 q = closest_point_on_segment(line[i], line[i + 1], p);
    const double d = distance_squared(p, q);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

SplitResult split_edge(TriMesh& mesh, const EdgeKey& e, const Vec3& pos, ConstraintSet* constraints) {
  SplitResult r = mesh.split_edge(e, pos);
  if (constraints) constraints->on_split(mesh, e, r);
  return r;
}

CollapseResult collapse_edge(TriMesh& mesh, const EdgeKey& e, const Vec3& keep_pos, int keep,
                             ConstraintSet* constraints) {
  CollapseResult r = mesh.collapse_edge(e, keep_pos, keep);
  if (constraints) constraints->on_collapse(mesh, r);
  return r;
}

EdgeKey flip_edge(TriMesh& mesh, const EdgeKey& e, const ConstraintSet* constraints) {
  if (constraints && constraints->is_feature_edge(e)) {
    throw Error(ErrorCode::kPrecondition, "feature edges are never flipped");
  }
  return mesh.flip_edge(e);
}

}  // namespace ambool
