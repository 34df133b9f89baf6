#include "ambool/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "ambool/error.hpp"
#include "ambool/parallel.hpp"

namespace ambool {

SpatialIndex SpatialIndex::build(const TriMesh& mesh, Options options) {
  SpatialIndex index;
  index.options_ = options;
  index.rebuild(mesh);
  return index;
}

void SpatialIndex::rebuild(const TriMesh& mesh) {
  nodes_.clear();
  boxes_.assign(mesh.triangle_slots(), Aabb{});
  registered_flag_.assign(mesh.triangle_slots(), 0);
  registered_ = 0;
  Aabb root;
  for (size_t t = 0; t < mesh.triangle_slots(); ++t) {
    if (!mesh.triangle_alive(int(t))) continue;
    boxes_[t] = mesh.triangle_bounds(int(t));
    root.extend(boxes_[t]);
  }
  if (root.empty()) root = Aabb{Vec3{}, Vec3{}};
  const double pad = 1e-6 * std::max(root.diagonal(), 1e-9);
  nodes_.push_back(Node{root.expanded(pad), -1, 0, {}});
  for (size_t t = 0; t < mesh.triangle_slots(); ++t) {
    if (!mesh.triangle_alive(int(t))) continue;
    insert(0, int(t));
    registered_flag_[t] = 1;
    ++registered_;
  }
  generation_ = mesh.generation();
}

void SpatialIndex::insert(int node, int t) {
  if (nodes_[node].first_child < 0) {
    nodes_[node].triangles.push_back(t);
    if (int(nodes_[node].triangles.size()) > options_.leaf_capacity && nodes_[node].depth < options_.max_depth) {
      split(node);
    }
    return;
  }
  const int first = nodes_[node].first_child;
  for (int c = 0; c < 8; ++c) {
    if (nodes_[first + c].box.overlaps(boxes_[t])) insert(first + c, t);
  }
}

void SpatialIndex::split(int node) {
  const Aabb box = nodes_[node].box;
  const Vec3 mid = box.center();
  const int first = int(nodes_.size());
  const int depth = nodes_[node].depth + 1;
  for (int c = 0; c < 8; ++c) {
    Aabb child;
    child.lo = {(c & 1) ? mid.x : box.lo.x, (c & 2) ? mid.y : box.lo.y, (c & 4) ? mid.z : box.lo.z};
    child.hi = {(c & 1) ? box.hi.x : mid.x, (c & 2) ? box.hi.y : mid.y, (c & 4) ? box.hi.z : mid.z};
    nodes_.push_back(Node{child, -1, depth, {}});
  }
  std::vector<int> moved = std::move(nodes_[node].triangles);
  nodes_[node].triangles.clear();
  nodes_[node].first_child = first;
  for (int t : moved) {
    for (int c = 0; c < 8; ++c) {
      if (nodes_[first + c].box.overlaps(boxes_[t])) insert(first + c, t);
    }
  }
}

void SpatialIndex::remove(int node, int t) {
  if (nodes_[node].first_child < 0) {
    auto& list = nodes_[node].triangles;
    list.erase(std::remove(list.begin(), list.end(), t), list.end());
    return;
  }
  const int first = nodes_[node].first_child;
  for (int c = 0; c < 8; ++c) {
    if (nodes_[first + c].box.overlaps(boxes_[t])) remove(first + c, t);
  }
}

void SpatialIndex::update_region(const TriMesh& mesh, std::span<const int> changed) {
  if (nodes_.empty()) {
    rebuild(mesh);
    return;
  }
  if (boxes_.size() < mesh.triangle_slots()) {
    boxes_.resize(mesh.triangle_slots(), Aabb{});
    registered_flag_.resize(mesh.triangle_slots(), 0);
  }
  const Aabb& root = nodes_[0].box;
  for (int t : changed) {
    if (t < 0 || size_t(t) >= boxes_.size()) continue;
    if (registered_flag_[t]) {
      remove(0, t);
      registered_flag_[t] = 0;
      --registered_;
    }
    if (!mesh.triangle_alive(t)) {
      boxes_[t] = Aabb{};
      continue;
    }
    const Aabb box = mesh.triangle_bounds(t);
    if (box.lo.x < root.lo.x || box.lo.y < root.lo.y || box.lo.z < root.lo.z || box.hi.x > root.hi.x ||
        box.hi.y > root.hi.y || box.hi.z > root.hi.z) {
      rebuild(mesh);
      return;
    }
    boxes_[t] = box;
    insert(0, t);
    registered_flag_[t] = 1;
    ++registered_;
  }
  generation_ = mesh.generation();
}

void SpatialIndex::check_current(const TriMesh& mesh) const {
  if (mesh.generation() != generation_) {
    throw Error(ErrorCode::kStaleIndex, "spatial index is stale; rebuild or update_region required");
  }
}

std::vector<int> SpatialIndex::query_box(const TriMesh& mesh, const Aabb& box) const {
  check_current(mesh);
  std::vector<int> out;
  if (nodes_.empty() || registered_ == 0) return out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.overlaps(box)) continue;
    if (node.first_child < 0) {
      for (int t : node.triangles) {
        if (boxes_[t].overlaps(box)) out.push_back(t);
      }
    } else {
      for (int c = 0; c < 8; ++c) stack.push_back(node.first_child + c);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

NearestResult nearest_point(const SpatialIndex& index, const TriMesh& mesh, const Vec3& q) {
  index.check_current(mesh);
  NearestResult best;
  double best_d2 = std::numeric_limits<double>::max();
  const auto& nodes = index.nodes();
  if (nodes.empty() || index.entry_count() == 0) return best;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.emplace(nodes[0].box.distance_squared_to(q), 0);
  while (!queue.empty()) {
    const auto [d2, id] = queue.top();
    queue.pop();
    if (d2 > best_d2) break;
    const auto& node = nodes[id];
    if (node.first_child < 0) {
      for (int t : node.triangles) {
        if (index.triangle_box(t).distance_squared_to(q) > best_d2) continue;
        const TrianglePoint cp = closest_point_on_triangle(mesh.triangle_points(t), q);
        const double td2 = distance_squared(cp.point, q);
        if (td2 < best_d2 || (td2 == best_d2 && t < best.triangle)) {
          best_d2 = td2;
          best.point = cp.point;
          best.triangle = t;
        }
      }
    } else {
      for (int c = 0; c < 8; ++c) {
        const double cd = nodes[node.first_child + c].box.distance_squared_to(q);
        if (cd <= best_d2) queue.emplace(cd, node.first_child + c);
      }
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

std::vector<RayHit> ray_hits(const SpatialIndex& index, const TriMesh& mesh, const Ray& ray) {
  index.check_current(mesh);
  std::vector<RayHit> hits;
  const auto& nodes = index.nodes();
  if (nodes.empty()) return hits;
  std::vector<int> candidates;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const auto& node = nodes[stack.back()];
    stack.pop_back();
    if (!ray_hits_box(ray, node.box)) continue;
    if (node.first_child < 0) {
      candidates.insert(candidates.end(), node.triangles.begin(), node.triangles.end());
    } else {
      for (int c = 0; c < 8; ++c) stack.push_back(node.first_child + c);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (int t : candidates) {
    const TrianglePoints pts = mesh.triangle_points(t);
    const auto hit = ray_triangle(ray, pts);
    if (!hit) continue;
    const Vec3 n = triangle_cross(pts[0], pts[1], pts[2]);
    hits.push_back({hit->t, t, dot(ray.direction, n) > 0.0 ? Facing::kBack : Facing::kFront, hit->unreliable});
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
    return a.t != b.t ? a.t < b.t : a.triangle < b.triangle;
  });
  return hits;
}

std::vector<std::pair<int, int>> intersecting_pairs(const SpatialIndex& index_a, const TriMesh& mesh_a,
                                                    const SpatialIndex& index_b, const TriMesh& mesh_b,
                                                    double tolerance) {
  index_a.check_current(mesh_a);
  index_b.check_current(mesh_b);
  const std::vector<int> tris = mesh_a.live_triangles();
  std::vector<std::vector<int>> found(tris.size());
  std::vector<uint8_t> degenerate_b(mesh_b.triangle_slots(), 2);  // 2 = unknown
  for (size_t t = 0; t < mesh_b.triangle_slots(); ++t) {
    if (mesh_b.triangle_alive(int(t))) degenerate_b[t] = is_degenerate(mesh_b.triangle_points(int(t)));
  }
  parallel_for(tris.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const int ta = tris[i];
      const TrianglePoints pa = mesh_a.triangle_points(ta);
      if (is_degenerate(pa)) continue;
      const Aabb box = mesh_a.triangle_bounds(ta).expanded(tolerance);
      for (int tb : index_b.query_box(mesh_b, box)) {
        if (degenerate_b[tb] != 0) continue;
        if (tri_tri_intersect(pa, mesh_b.triangle_points(tb), tolerance)) found[i].push_back(tb);
      }
    }
  }, 64);
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < tris.size(); ++i) {
    for (int tb : found[i]) out.emplace_back(tris[i], tb);
  }
  return out;
}

std::vector<IntersectionSegment> intersection_segments(const TriMesh& mesh_a, const TriMesh& mesh_b,
                                                       std::span<const std::pair<int, int>> pairs) {
  std::vector<IntersectionSegment> out;
  out.reserve(pairs.size());
  for (const auto& [ta, tb] : pairs) {
    auto seg = tri_tri_segment(mesh_a.triangle_points(ta), mesh_b.triangle_points(tb));
    if (!seg) continue;
    seg->tri_a = ta;
    seg->tri_b = tb;
    out.push_back(*seg);
  }
  return out;
}

}  // namespace ambool
