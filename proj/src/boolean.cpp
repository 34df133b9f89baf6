#include "ambool/boolean.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "ambool/error.hpp"
#include "ambool/geometry.hpp"
#include "nearest_tree.hpp"

namespace ambool {

const char* to_string(BooleanOp op) {
  switch (op) {
    case BooleanOp::kUnion: return "union";
    case BooleanOp::kIntersection: return "intersection";
    case BooleanOp::kDifference: return "difference";
  }
  return "?";
}

const char* to_string(Containment c) {
  switch (c) {
    case Containment::kInside: return "inside";
    case Containment::kOutside: return "outside";
    case Containment::kAmbiguous: return "ambiguous";
  }
  return "?";
}

void BooleanParams::check() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (!(tolerance >= 0.0)) fail("tolerance must be non-negative");
  if (max_refine_iterations < 1) fail("max_refine_iterations must be at least 1");
  if (rays < 1 || rays % 2 == 0) fail("ray count must be a positive odd number");
  if (!(sharp_angle > 0.0 && sharp_angle < kPi)) fail("sharp angle must lie in (0, pi)");
  if (!(seam_resolution > 0.0)) fail("seam resolution must be positive");
  if (!(target_edge_length >= 0.0)) fail("target edge length must be non-negative");
  if (!(zipper_step > 0.0 && zipper_step <= 0.5)) fail("zipper step must lie in (0, 0.5]");
  if (zipper_iterations < 1) fail("zipper iterations must be at least 1");
}

IntersectionSets find_intersection_sets(const TriMesh& mesh_a, const TriMesh& mesh_b, const SpatialIndex& index_a,
                                        const SpatialIndex& index_b, double tolerance) {
  IntersectionSets out;
  out.pairs = intersecting_pairs(index_a, mesh_a, index_b, mesh_b, tolerance);
  for (const auto& [ta, tb] : out.pairs) {
    out.a.push_back(ta);
    out.b.push_back(tb);
  }
  for (auto* v : {&out.a, &out.b}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return out;
}

std::vector<BoundaryLoop> delete_and_clean(TriMesh& mesh, std::span<const int> triangles, std::vector<int>* removed) {
  std::vector<uint8_t> touched(mesh.vertex_slots(), 0);
  std::vector<int> gone;
  auto kill = [&](int t) {
    if (!mesh.triangle_alive(t)) return;
    for (int v : mesh.triangle(t)) touched[v] = 1;
    mesh.remove_triangle(t);
    gone.push_back(t);
  };
  for (int t : triangles) kill(t);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t v = 0; v < touched.size(); ++v) {
      if (!touched[v] || !mesh.vertex_alive(int(v)) || !is_bowtie(mesh, int(v))) continue;
      const std::vector<int> ring(mesh.vertex_triangles(int(v)).begin(), mesh.vertex_triangles(int(v)).end());
      for (int t : ring) kill(t);
      changed = true;
    }
  }
  if (removed) *removed = gone;
  if (mesh.empty()) throw Error(ErrorCode::kEmptyPatch, "deleting the intersection set leaves no triangles");
  std::vector<BoundaryLoop> loops;
  for (BoundaryLoop& l : boundary_loops(mesh)) {
    if (std::any_of(l.vertices.begin(), l.vertices.end(), [&](int v) { return touched[v] != 0; })) {
      loops.push_back(std::move(l));
    }
  }
  return loops;
}

Containment classify_patch(const TriMesh& mesh, std::span<const int> patch, const TriMesh& containment,
                           const SpatialIndex& index, int rays, std::mt19937_64& rng) {
  if (patch.empty()) throw Error(ErrorCode::kEmptyPatch, "cannot classify an empty patch");
  std::vector<double> cumulative;
  cumulative.reserve(patch.size());
  double total = 0.0;
  for (int t : patch) {
    total += mesh.triangle_area(t);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) return Containment::kAmbiguous;
  const double eps = 1e-9 * std::max(containment.bounds().diagonal(), mesh.bounds().diagonal());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kRecasts = 3;
  int inside = 0, outside = 0;
  for (int r = 0; r < rays; ++r) {
    for (int attempt = 0; attempt <= kRecasts; ++attempt) {
      const double pick = unit(rng) * total;
      const size_t k = std::min(size_t(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin()),
                                patch.size() - 1);
      double u = unit(rng), w = unit(rng);
      if (u + w > 1.0) {
        u = 1.0 - u;
        w = 1.0 - w;
      }
      const auto p = mesh.triangle_points(patch[k]);
      const Vec3 n = mesh.triangle_normal(patch[k]);
      if (length(n) == 0.0) continue;
      const Ray ray{p[0] + (p[1] - p[0]) * u + (p[2] - p[0]) * w, n};
      const std::vector<RayHit> hits = ray_hits(index, containment, ray);
      const auto first = std::find_if(hits.begin(), hits.end(), [&](const RayHit& h) { return h.t > eps; });
      if (first == hits.end()) {
        ++outside;
        break;
      }
      if (first->unreliable) continue;
      (first->facing == Facing::kBack ? inside : outside) += 1;
      break;
    }
  }
  if (2 * inside > rays) return Containment::kInside;
  if (2 * outside > rays) return Containment::kOutside;
  return Containment::kAmbiguous;
}

PatchSelection select_patches(BooleanOp op, std::span<const Containment> a, std::span<const Containment> b) {
  for (auto side : {a, b}) {
    if (std::find(side.begin(), side.end(), Containment::kAmbiguous) != side.end()) {
      throw Error(ErrorCode::kAmbiguousClassification, "a patch could not be classified");
    }
  }
  PatchSelection s;
  s.keep_a.resize(a.size());
  s.flip_a.assign(a.size(), 0);
  s.keep_b.resize(b.size());
  s.flip_b.assign(b.size(), 0);
  const Containment keep_a = op == BooleanOp::kIntersection ? Containment::kInside : Containment::kOutside;
  const Containment keep_b = op == BooleanOp::kUnion ? Containment::kOutside : Containment::kInside;
  for (size_t i = 0; i < a.size(); ++i) s.keep_a[i] = a[i] == keep_a;
  for (size_t i = 0; i < b.size(); ++i) {
    s.keep_b[i] = b[i] == keep_b;
    s.flip_b[i] = op == BooleanOp::kDifference && s.keep_b[i];
  }
  return s;
}

LoopPairs pair_loops(const TriMesh& mesh_a, std::span<const BoundaryLoop> loops_a, const TriMesh& mesh_b,
                     std::span<const BoundaryLoop> loops_b, bool allow_unpaired) {
  auto votes = [](const TriMesh& from_mesh, std::span<const BoundaryLoop> from, const TriMesh& to_mesh,
                  std::span<const BoundaryLoop> to) {
    std::vector<std::pair<Vec3, int>> pts;
    for (size_t j = 0; j < to.size(); ++j) {
      for (int v : to[j].vertices) pts.emplace_back(to_mesh.position(v), int(j));
    }
    std::vector<int> choice(from.size(), -1);
    if (pts.empty()) return choice;
    for (size_t i = 0; i < from.size(); ++i) {
      std::vector<int> count(to.size(), 0);
      for (int v : from[i].vertices) {
        const Vec3& p = from_mesh.position(v);
        double best = std::numeric_limits<double>::max();
        int loop = -1;
        for (const auto& [q, j] : pts) {
          const double d = distance_squared(p, q);
          if (d < best) {
            best = d;
            loop = j;
          }
        }
        ++count[loop];
      }
      choice[i] = int(std::max_element(count.begin(), count.end()) - count.begin());
    }
    return choice;
  };
  const std::vector<int> va = votes(mesh_a, loops_a, mesh_b, loops_b);
  const std::vector<int> vb = votes(mesh_b, loops_b, mesh_a, loops_a);
  LoopPairs out;
  std::vector<uint8_t> paired_b(loops_b.size(), 0);
  for (size_t i = 0; i < loops_a.size(); ++i) {
    const int j = va[i];
    if (j >= 0 && vb[j] == int(i)) {
      out.pairs.emplace_back(int(i), j);
      paired_b[j] = 1;
    } else {
      out.unpaired_a.push_back(int(i));
    }
  }
  for (size_t j = 0; j < loops_b.size(); ++j) {
    if (!paired_b[j]) out.unpaired_b.push_back(int(j));
  }
  if (!allow_unpaired && (!out.unpaired_a.empty() || !out.unpaired_b.empty())) {
    throw Error(ErrorCode::kLoopMismatch, std::to_string(out.unpaired_a.size() + out.unpaired_b.size()) +
                                              " boundary loops have no partner (" + std::to_string(loops_a.size()) +
                                              " vs " + std::to_string(loops_b.size()) + ")");
  }
  return out;
}

ConstraintSet detect_sharp_edges(const TriMesh& mesh, double threshold, int surface) {
  ConstraintSet c;
  std::map<int, std::vector<int>> adj;
  for (const EdgeKey& e : mesh.edges()) {
    std::array<int, 2> ts;
    if (mesh.edge_triangles(e, ts) != 2) continue;
    const double d = std::clamp(dot(mesh.triangle_normal(ts[0]), mesh.triangle_normal(ts[1])), -1.0, 1.0);
    if (std::acos(d) > threshold) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  }
  if (adj.empty()) return c;
  for (auto& [v, n] : adj) std::sort(n.begin(), n.end());
  std::set<EdgeKey> visited;
  auto walk = [&](int start, int next) {
    std::vector<int> chain{start};
    int prev = start, cur = next;
    visited.insert(EdgeKey(start, next));
    chain.push_back(cur);
    while (adj[cur].size() == 2 && cur != start) {
      const int n = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      if (visited.count(EdgeKey(cur, n))) break;
      visited.insert(EdgeKey(cur, n));
      prev = cur;
      cur = n;
      chain.push_back(cur);
    }
    const int id = int(c.polylines.size());
    std::vector<Vec3> pts;
    for (int v : chain) pts.push_back(mesh.position(v));
    c.polylines.push_back(std::move(pts));
    for (size_t i = 0; i + 1 < chain.size(); ++i) c.add_feature_edge(EdgeKey(chain[i], chain[i + 1]), id);
    for (int v : chain) {
      if (adj[v].size() == 2) c.set_binding(v, VertexBinding::polyline(id, surface));
    }
  };
  for (auto& [v, n] : adj) {
    if (n.size() == 2) continue;
    c.set_binding(v, VertexBinding::fixed(surface));
    for (int w : n) {
      if (!visited.count(EdgeKey(v, w))) walk(v, w);
    }
  }
  for (auto& [v, n] : adj) {
    for (int w : n) {
      if (!visited.count(EdgeKey(v, w))) walk(v, w);
    }
  }
  return c;
}

bool needs_border_strip(const TriMesh& mesh, const BoundaryLoop& loop, const ConstraintSet& constraints) {
  for (size_t i = 0; i < loop.size(); ++i) {
    const int v = loop.vertices[i];
    if (constraints.is_feature_edge(EdgeKey(v, loop.at(long(i) + 1)))) return true;
    if (constraints.binding(v).is_feature() && constraints.feature_degree(mesh, v) == 0) return true;
  }
  return false;
}

size_t append_border_strip(TriMesh& mesh, const BoundaryLoop& loop, double width, ConstraintSet& constraints,
                           const ProjectionTarget& surface, int surface_id, BoundaryLoop* outer) {
  if (outer) *outer = loop;
  if (loop.size() < 3 || !needs_border_strip(mesh, loop, constraints)) return 0;
  const size_t n = loop.size();
  const auto* source = std::get_if<MeshSurface>(&surface.variant());
  std::vector<Vec3> edge_out(n);
  for (size_t i = 0; i < n; ++i) {
    const int a = loop.vertices[i], b = loop.at(long(i) + 1);
    std::array<int, 2> ts;
    mesh.edge_triangles(EdgeKey(a, b), ts);
    const Vec3 t = mesh.position(b) - mesh.position(a);
    const Vec3 inner = mesh.triangle_normal(ts[0]);
    const Vec3 out = normalized(cross(t, inner));
    edge_out[i] = out;
    if (!source) continue;
    // Continue along the face beyond the border, which may meet this one at a crease.
    const Vec3 probe = (mesh.position(a) + mesh.position(b)) * 0.5 + (out - inner) * (0.25 * width);
    const NearestResult near = nearest_point(*source->index, *source->mesh, probe);
    if (near.triangle < 0) continue;
    Vec3 d = normalized(cross(source->mesh->triangle_normal(near.triangle), t));
    if (dot(d, out - inner) < 0.0) d = d * -1.0;
    if (length(d) > 0.0) edge_out[i] = d;
  }
  std::vector<int> w(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 dir = normalized(edge_out[i] + edge_out[(i + n - 1) % n]);
    w[i] = mesh.add_vertex(surface.project(mesh.position(loop.vertices[i]) + dir * width));
    constraints.set_binding(w[i], surface.is_none() ? VertexBinding::free() : VertexBinding::on_surface(surface_id));
  }
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    mesh.add_triangle(loop.vertices[j], loop.vertices[i], w[i]);
    mesh.add_triangle(loop.vertices[j], w[i], w[j]);
  }
  if (outer) *outer = trace_boundary_loop(mesh, w[0]);
  return 2 * n;
}

namespace {

double min_quality(std::span<const std::array<Vec3, 3>> tris) {
  double q = 1.0;
  for (const auto& t : tris) q = std::min(q, triangle_quality(t[0], t[1], t[2]));
  return q;
}

// Tries to remove `r` by collapsing it into `k` without moving `k`.
bool try_simplify_collapse(TriMesh& mesh, const Region& region, int r, int k, double max_edge, double max_dev,
                           ConstraintSet& c, std::span<const ProjectionTarget> targets) {
  const EdgeKey e(r, k);
  if (mesh.is_boundary_vertex(r)) return false;
  for (int t : mesh.vertex_triangles(r)) {
    if (!region.contains(t)) return false;
  }
  const VertexBinding br = c.binding(r);
  const bool feature_edge = c.is_feature_edge(e);
  if (br.kind == VertexBinding::Kind::kFixed) return false;
  if (br.kind == VertexBinding::Kind::kOnPolyline) {
    if (!feature_edge || c.feature_degree(mesh, r) != 2) return false;
  } else if (feature_edge) {
    return false;
  }
  const Vec3 pr = mesh.position(r), pk = mesh.position(k);
  for (int x : mesh.vertex_neighbors(r)) {
    if (x != k && distance(pk, mesh.position(x)) > max_edge) return false;
  }
  if (!mesh.can_collapse(e, pk, k)) return false;
  std::vector<std::array<Vec3, 3>> before, after;
  for (int t : mesh.vertex_triangles(r)) {
    auto p = mesh.triangle_points(t);
    before.push_back(p);
    const Triangle& tri = mesh.triangle(t);
    if (tri[0] == k || tri[1] == k || tri[2] == k) continue;
    for (int i = 0; i < 3; ++i) {
      if (tri[i] == r) p[i] = pk;
    }
    after.push_back(p);
  }
  if (after.empty()) return false;
  double dev = std::numeric_limits<double>::max();
  for (const auto& t : after) dev = std::min(dev, distance(closest_point_on_triangle(t, pr).point, pr));
  if (dev > max_dev) return false;
  if (br.kind == VertexBinding::Kind::kOnPolyline) {
    for (int x : mesh.vertex_neighbors(r)) {
      if (x != k && c.is_feature_edge(EdgeKey(r, x)) &&
          distance(closest_point_on_segment(pk, mesh.position(x), pr), pr) > max_dev) {
        return false;
      }
    }
  }
  if (br.surface >= 0 && size_t(br.surface) < targets.size()) {
    const ProjectionTarget& target = targets[br.surface];
    for (const auto& t : after) {
      if (target.distance_to((t[0] + t[1] + t[2]) / 3.0) > max_dev) return false;
    }
  }
  if (min_quality(after) < std::min(0.1, min_quality(before))) return false;
  collapse_edge(mesh, e, pk, k, &c);
  return true;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

// Splits intersection segments into connected curves and hands each curve to
// the loop pair whose vertices lie nearest to most of its segments.
std::vector<std::vector<IntersectionSegment>> segments_per_pair(const std::vector<IntersectionSegment>& segments,
                                                                const std::vector<std::vector<Vec3>>& pair_points) {
  std::vector<std::vector<IntersectionSegment>> out(pair_points.size());
  if (segments.empty() || pair_points.empty()) return out;
  if (pair_points.size() == 1) {
    out[0] = segments;
    return out;
  }
  Vec3 lo = segments[0].p0, hi = lo;
  for (const auto& s : segments) {
    for (const Vec3& p : {s.p0, s.p1}) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  }
  const double tol = 1e-9 * std::max(length(hi - lo), 1e-12);
  using Cell = std::array<int64_t, 3>;
  auto cell_of = [&](const Vec3& p) {
    return Cell{int64_t(std::floor((p.x - lo.x) / tol)), int64_t(std::floor((p.y - lo.y) / tol)),
                int64_t(std::floor((p.z - lo.z) / tol))};
  };
  std::vector<int> parent(segments.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::map<Cell, std::vector<int>> grid;
  for (size_t i = 0; i < segments.size(); ++i) {
    for (const Vec3& p : {segments[i].p0, segments[i].p1}) {
      const Cell c = cell_of(p);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = grid.find(Cell{c[0] + dx, c[1] + dy, c[2] + dz});
            if (it == grid.end()) continue;
            for (int j : it->second) {
              const auto& o = segments[j];
              if (distance(o.p0, p) <= tol || distance(o.p1, p) <= tol) parent[find_root(parent, j)] = find_root(parent, int(i));
            }
          }
      grid[c].push_back(int(i));
    }
  }

  std::vector<Vec3> points;
  std::vector<int> owner;
  for (size_t k = 0; k < pair_points.size(); ++k) {
    for (const Vec3& p : pair_points[k]) {
      points.push_back(p);
      owner.push_back(int(k));
    }
  }
  const PointTree tree(std::move(points));
  std::map<int, std::vector<int>> votes;
  for (size_t i = 0; i < segments.size(); ++i) {
    auto& v = votes[find_root(parent, int(i))];
    v.resize(pair_points.size());
    ++v[owner[tree.nearest((segments[i].p0 + segments[i].p1) / 2.0)]];
  }
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& v = votes[find_root(parent, int(i))];
    out[std::max_element(v.begin(), v.end()) - v.begin()].push_back(segments[i]);
  }
  return out;
}

}  // namespace

SimplifyStats post_simplify(TriMesh& mesh, const Region& region, double max_edge_length, double max_deviation,
                            ConstraintSet& constraints, std::span<const ProjectionTarget> targets,
                            std::span<const std::vector<int>> curves) {
  SimplifyStats stats;
  stats.triangles_before = mesh.triangle_count();
  const int base = int(constraints.polylines.size());
  std::vector<std::pair<int, VertexBinding>> saved;
  for (const std::vector<int>& curve : curves) {
    if (curve.size() < 2) continue;
    const int id = int(constraints.polylines.size());
    std::vector<Vec3> pts;
    for (int v : curve) pts.push_back(mesh.position(v));
    pts.push_back(mesh.position(curve.front()));
    constraints.polylines.push_back(std::move(pts));
    for (size_t i = 0; i < curve.size(); ++i) {
      const int a = curve[i], b = curve[(i + 1) % curve.size()];
      if (a != b && mesh.has_edge(a, b) && !constraints.is_feature_edge(EdgeKey(a, b))) {
        constraints.add_feature_edge(EdgeKey(a, b), id);
      }
      const VertexBinding old = constraints.binding(a);
      if (!old.is_feature()) {
        saved.emplace_back(a, old);
        constraints.set_binding(a, VertexBinding::polyline(id, old.surface));
      }
    }
  }
  for (int pass = 0; pass < 16; ++pass) {
    std::vector<std::pair<double, EdgeKey>> order;
    for (const EdgeKey& e : region.edges(mesh)) order.emplace_back(mesh.edge_length(e), e);
    std::sort(order.begin(), order.end());
    size_t done = 0;
    for (const auto& [len, e] : order) {
      if (!mesh.vertex_alive(e.a) || !mesh.vertex_alive(e.b) || !mesh.has_edge(e.a, e.b)) continue;
      if (try_simplify_collapse(mesh, region, e.b, e.a, max_edge_length, max_deviation, constraints, targets) ||
          try_simplify_collapse(mesh, region, e.a, e.b, max_edge_length, max_deviation, constraints, targets)) {
        ++done;
      }
    }
    stats.collapses += done;
    if (done == 0) break;
  }
  std::vector<EdgeKey> temp;
  for (const auto& [e, id] : constraints.feature_edges()) {
    if (id >= base) temp.push_back(e);
  }
  for (const EdgeKey& e : temp) constraints.remove_feature_edge(e);
  for (const auto& [v, b] : saved) {
    if (mesh.vertex_alive(v)) constraints.set_binding(v, b);
  }
  constraints.polylines.resize(size_t(base));
  stats.triangles_after = mesh.triangle_count();
  return stats;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

struct StageTimer {
  double& total;
  Clock::time_point start = Clock::now();
  ~StageTimer() { total += elapsed(start); }
};

double median_edge_length(const TriMesh& mesh, std::span<const int> tris) {
  std::set<EdgeKey> edges;
  for (int t : tris) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) edges.insert(EdgeKey(tri[i], tri[(i + 1) % 3]));
  }
  std::vector<double> len;
  for (const EdgeKey& e : edges) len.push_back(mesh.edge_length(e));
  if (len.empty()) return 0.0;
  std::nth_element(len.begin(), len.begin() + long(len.size() / 2), len.end());
  return len[len.size() / 2];
}

double max_edge_length(const TriMesh& mesh, std::span<const int> tris) {
  double m = 0.0;
  for (int t : tris) {
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) m = std::max(m, mesh.edge_length(EdgeKey(tri[i], tri[(i + 1) % 3])));
  }
  return m;
}

using TriangleKey = std::array<double, 9>;

TriangleKey triangle_key(const TriMesh& mesh, int t) {
  std::array<Vec3, 3> p = mesh.triangle_points(t);
  std::sort(p.begin(), p.end(), [](const Vec3& a, const Vec3& b) {
    return a.x != b.x ? a.x < b.x : a.y != b.y ? a.y < b.y : a.z < b.z;
  });
  return {p[0].x, p[0].y, p[0].z, p[1].x, p[1].y, p[1].z, p[2].x, p[2].y, p[2].z};
}

struct Side {
  const TriMesh* input = nullptr;
  TriMesh work;
  ConstraintSet constraints;
  SpatialIndex index;
  ProjectionTarget snapshot;
  bool closed = false;

  const MeshSurface& surface() const { return std::get<MeshSurface>(snapshot.variant()); }
};

class Pipeline {
 public:
  Pipeline(const TriMesh& a, const TriMesh& b, const BooleanParams& params) : params_(params) {
    sides_[0].input = &a;
    sides_[1].input = &b;
  }

  BooleanResult run();

 private:
  void refine(int level, double l_max);
  BooleanResult assemble(int level, double l_level);

  BooleanParams params_;
  Side sides_[2];
  IntersectionSets sets_;
  std::vector<IntersectionSegment> input_segments_;
  BooleanReport report_;
  StageTimings timings_;
  double base_length_ = 0.0;
  double input_length_ = 0.0;
};

BooleanResult Pipeline::run() {
  {
  StageTimer timer{timings_.overhead};
  for (int s = 0; s < 2; ++s) {
    Side& side = sides_[s];
    if (!validate(*side.input).empty()) {
      throw Error(ErrorCode::kPrecondition, std::string("input ") + (s == 0 ? "A" : "B") + " fails validation");
    }
    side.snapshot = ProjectionTarget::mesh(*side.input);
    side.work = *side.input;
    side.closed = boundary_loops(side.work).empty();
    if (params_.preserve_sharp) side.constraints = detect_sharp_edges(side.work, params_.sharp_angle, 0);
    for (int v : side.work.live_vertices()) {
      if (side.constraints.binding(v).kind == VertexBinding::Kind::kFree) {
        side.constraints.set_binding(v, VertexBinding::on_surface(0));
      }
    }
    side.index = SpatialIndex::build(side.work);
  }
  if (params_.use_segment_steps && params_.precision == Precision::kPrecise) {
    const MeshSurface &sa = sides_[0].surface(), &sb = sides_[1].surface();
    input_segments_ = intersection_segments(*sa.mesh, *sb.mesh, intersecting_pairs(*sa.index, *sa.mesh, *sb.index, *sb.mesh, 0.0));
  }
  }
  report_.op = params_.op;

  {
  StageTimer timer{timings_.intersection};
  sets_ = find_intersection_sets(sides_[0].work, sides_[1].work, sides_[0].index, sides_[1].index, params_.tolerance);
  if (!sets_.empty()) {
    input_length_ = std::min(median_edge_length(sides_[0].work, sets_.a), median_edge_length(sides_[1].work, sets_.b));
  }
  base_length_ = params_.target_edge_length > 0.0 ? params_.target_edge_length : input_length_;
  report_.target_edge_length = base_length_;
  }

  BooleanResult result;
  for (int level = 0; level <= params_.max_refine_iterations; ++level) {
    const double l_level = base_length_ / std::ldexp(1.0, level);
    if (!sets_.empty()) {
      StageTimer timer{timings_.intersection};
      const bool coarse = level == 0 && std::max(max_edge_length(sides_[0].work, sets_.a),
                                                  max_edge_length(sides_[1].work, sets_.b)) > 2.0 * base_length_;
      if (level > 0 || coarse) {
        refine(level, l_level);
      } else {
        size_t count = 0;
        for (int s = 0; s < 2; ++s) {
          Region r(sides_[s].work, s == 0 ? sets_.a : sets_.b);
          r.grow_one_ring(sides_[s].work);
          count += r.size(sides_[s].work);
        }
        report_.region_triangles.push_back(count);
      }
    }
    try {
      result = assemble(level, l_level);
      result.report.levels = level;
      result.report.timings = timings_;
      return result;
    } catch (const Error& e) {
      report_.failures.push_back("level " + std::to_string(level) + ": " + e.what());
    }
    if (sets_.empty()) break;
  }
  result = BooleanResult{};
  report_.success = false;
  report_.levels = params_.max_refine_iterations;
  report_.timings = timings_;
  result.report = report_;
  return result;
}

void Pipeline::refine(int level, double l_max) {
  (void)level;
  size_t count = 0;
  for (int s = 0; s < 2; ++s) {
    Side& side = sides_[s];
    Region region(side.work, s == 0 ? sets_.a : sets_.b);
    region.grow_one_ring(side.work);
    const std::vector<ProjectionTarget> targets{side.snapshot};
    remesh_region(side.work, region, RemeshParams::with_target(l_max), side.constraints, targets);
    count += region.size(side.work);
    side.index = SpatialIndex::build(side.work);
  }
  report_.region_triangles.push_back(count);
  sets_ = find_intersection_sets(sides_[0].work, sides_[1].work, sides_[0].index, sides_[1].index, params_.tolerance);
}

BooleanResult Pipeline::assemble(int level, double l_level) {
  BooleanReport report = report_;
  std::optional<StageTimer> timer;
  timer.emplace(timings_.intersection);
  TriMesh work[2] = {sides_[0].work, sides_[1].work};
  ConstraintSet cons[2] = {sides_[0].constraints, sides_[1].constraints};
  std::vector<uint8_t> touched[2];
  bool emptied[2] = {false, false};
  for (int s = 0; s < 2; ++s) {
    touched[s].assign(work[s].vertex_slots(), 0);
    if (sets_.empty()) continue;
    std::vector<int> removed;
    const std::vector<int>& set = s == 0 ? sets_.a : sets_.b;
    for (int t : set) {
      for (int v : work[s].triangle(t)) touched[s][v] = 1;
    }
    try {
      delete_and_clean(work[s], set, &removed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyPatch) throw;
      emptied[s] = true;
    }
    for (int t : removed) {
      for (int v : work[s].triangle(t)) touched[s][v] = 1;
    }
    if (emptied[s]) continue;
    // Patches lying entirely on the rim of the deleted band are below the
    // current resolution.
    size_t left = 0;
    for (const std::vector<int>& patch : connected_components(work[s])) {
      const bool island = std::all_of(patch.begin(), patch.end(), [&](int t) {
        const auto tri = work[s].triangle(t);
        return std::all_of(tri.begin(), tri.end(), [&](int v) { return touched[s][v] != 0; });
      });
      if (!island) {
        ++left;
        continue;
      }
      for (int t : patch) work[s].remove_triangle(t);
      ++report.islands_removed;
    }
    if (left == 0) emptied[s] = true;
  }

  // Both surfaces lie within tolerance of each other: union and intersection are either one.
  const bool coincident = emptied[0] && emptied[1] && params_.op != BooleanOp::kDifference;
  if (coincident) {
    work[0] = sides_[0].work;
    touched[0].assign(work[0].vertex_slots(), 0);
    emptied[0] = false;
    report.warnings.push_back("inputs coincide within tolerance");
  }

  std::vector<std::vector<int>> patches[2];
  std::vector<Containment> classes[2];
  for (int s = 0; s < 2; ++s) {
    if (emptied[s]) continue;
    patches[s] = connected_components(work[s]);
    const Side& other = sides_[1 - s];
    for (size_t p = 0; p < patches[s].size(); ++p) {
      if (coincident) {
        classes[s].push_back(params_.op == BooleanOp::kUnion ? Containment::kOutside : Containment::kInside);
        continue;
      }
      std::seed_seq seq{uint64_t(params_.seed), uint64_t(s), uint64_t(p), uint64_t(level)};
      std::mt19937_64 rng(seq);
      classes[s].push_back(classify_patch(work[s], patches[s][p], *other.surface().mesh, *other.surface().index,
                                          params_.rays, rng));
    }
  }
  report.patches = patches[0].size() + patches[1].size();
  const PatchSelection sel = select_patches(params_.op, classes[0], classes[1]);
  for (int s = 0; s < 2; ++s) {
    const auto& keep = s == 0 ? sel.keep_a : sel.keep_b;
    const auto& flip = s == 0 ? sel.flip_a : sel.flip_b;
    for (size_t p = 0; p < patches[s].size(); ++p) {
      for (int t : patches[s][p]) {
        if (!keep[p]) {
          work[s].remove_triangle(t);
        } else if (flip[p]) {
          work[s].flip_triangle(t);
        }
      }
    }
  }

  std::vector<BoundaryLoop> loops[2];
  for (int s = 0; s < 2; ++s) {
    for (BoundaryLoop& l : boundary_loops(work[s])) {
      if (std::any_of(l.vertices.begin(), l.vertices.end(),
                      [&](int v) { return size_t(v) < touched[s].size() && touched[s][v]; })) {
        loops[s].push_back(std::move(l));
      }
    }
  }
  report.loops = loops[0].size() + loops[1].size();
  const bool both_closed = sides_[0].closed && sides_[1].closed;
  const LoopPairs lp = pair_loops(work[0], loops[0], work[1], loops[1], !both_closed);
  report.unpaired_loops = lp.unpaired_a.size() + lp.unpaired_b.size();
  timer.reset();
  timer.emplace(timings_.zipper);
  std::vector<int> map_a, map_b;
  TriMesh combined = work[0].compacted(&map_a);
  ConstraintSet constraints = cons[0].remapped(map_a);
  const TriMesh packed_b = work[1].compacted(&map_b);
  const std::vector<int> append_map = combined.append(packed_b);
  for (int& v : map_b) {
    if (v >= 0) v = append_map[v];
  }
  constraints.absorb(cons[1], map_b, 1);
  const bool precise = params_.precision == Precision::kPrecise;
  for (int v : combined.live_vertices()) {
    const VertexBinding b = constraints.binding(v);
    if (!precise && b.kind == VertexBinding::Kind::kOnSurface) constraints.set_binding(v, VertexBinding::free());
  }
  constraints.prune(combined);
  auto remap_loop = [](const BoundaryLoop& l, const std::vector<int>& map) {
    BoundaryLoop out = l;
    for (int& v : out.vertices) v = map[v];
    return out;
  };

  const std::vector<ProjectionTarget> targets{sides_[0].snapshot, sides_[1].snapshot};
  const std::vector<ProjectionTarget> no_targets;
  std::span<const ProjectionTarget> active = precise ? std::span<const ProjectionTarget>(targets)
                                                     : std::span<const ProjectionTarget>(no_targets);
  const std::vector<IntersectionSegment> segments =
      !params_.use_segment_steps ? std::vector<IntersectionSegment>{}
      : precise                  ? input_segments_
                                 : intersection_segments(sides_[0].work, sides_[1].work, sets_.pairs);

  ZipperParams zp;
  zp.t = params_.zipper_step;
  zp.max_iterations = params_.zipper_iterations;
  zp.target_edge_length = l_level * params_.seam_resolution;
  zp.use_segment_steps = params_.use_segment_steps;
  report.seam_target_edge_length = zp.target_edge_length;

  auto current_loop = [&](const BoundaryLoop& l) {
    for (int v : l.vertices) {
      if (combined.vertex_alive(v) && combined.is_boundary_vertex(v)) return trace_boundary_loop(combined, v);
    }
    throw Error(ErrorCode::kInvalidLoop, "a paired loop vanished before zippering");
  };

  std::vector<std::vector<Vec3>> pair_points;
  for (const auto& [ia, ib] : lp.pairs) {
    auto& pts = pair_points.emplace_back();
    for (int v : loops[0][ia].vertices) pts.push_back(work[0].position(v));
    for (int v : loops[1][ib].vertices) pts.push_back(work[1].position(v));
  }
  const auto pair_segments = segments_per_pair(segments, pair_points);

  BooleanResult result;
  size_t corner_total = 0;
  for (size_t pi = 0; pi < lp.pairs.size(); ++pi) {
    const auto [ia, ib] = lp.pairs[pi];
    BoundaryLoop la = current_loop(remap_loop(loops[0][ia], map_a));
    BoundaryLoop lb = current_loop(remap_loop(loops[1][ib], map_b));
    LoopPairReport pr;
    if (params_.preserve_sharp && params_.border_strips) {
      BoundaryLoop outer;
      pr.strip_triangles += append_border_strip(combined, la, 0.25 * l_level, constraints,
                                                precise ? targets[0] : ProjectionTarget(), 0, &outer);
      la = outer;
      pr.strip_triangles += append_border_strip(combined, lb, 0.25 * l_level, constraints,
                                                precise ? targets[1] : ProjectionTarget(), 1, &outer);
      lb = outer;
    }
    pr.loop_a_size = la.size();
    pr.loop_b_size = lb.size();
    const SeamReport sr = zipper(combined, la, lb, zp, active, precise ? 0 : -1, precise ? 1 : -1, constraints,
                                 pair_segments[pi]);
    pr.iterations = sr.iterations;
    pr.seam_vertices = sr.seam.size();
    pr.corner_triangles = sr.corner_triangles;
    corner_total += sr.corner_triangles;
    for (const SeamDiagnostic& d : sr.diagnostics) report.warnings.push_back("seam: " + d.message);
    result.seams.push_back(sr.seam);
    report.pairings.push_back(pr);
  }
  if (corner_total > 0) report.warnings.push_back("corner gaps filled: " + std::to_string(corner_total) + " triangles");
  if (report.unpaired_loops > 0) {
    report.warnings.push_back(std::to_string(report.unpaired_loops) + " boundary loops left open");
  }

  std::set<TriangleKey> originals;
  for (int s = 0; s < 2; ++s) {
    for (int t : sides_[s].input->live_triangles()) originals.insert(triangle_key(*sides_[s].input, t));
  }
  if (params_.post_simplify && !result.seams.empty()) {
    std::vector<int> fresh;
    for (int t : combined.live_triangles()) {
      if (!originals.count(triangle_key(combined, t))) fresh.push_back(t);
    }
    Region region(combined, fresh);
    const double max_dev = params_.tolerance > 0.0 ? params_.tolerance : 0.01 * zp.target_edge_length;
    const SimplifyStats st = post_simplify(combined, region, std::max(input_length_, 2.0 * zp.target_edge_length),
                                           max_dev, constraints, active, result.seams);
    report.simplify_collapses = st.collapses;
  }

  std::vector<int> final_map;
  TriMesh out = combined.compacted(&final_map);
  result.constraints = constraints.remapped(final_map);
  result.constraints.prune(out);
  for (auto& seam : result.seams) {
    std::vector<int> kept;
    for (int v : seam) {
      if (combined.vertex_alive(v) && final_map[v] >= 0 && (kept.empty() || kept.back() != final_map[v])) {
        kept.push_back(final_map[v]);
      }
    }
    seam = std::move(kept);
  }

  const std::vector<Diagnostic> defects = validate(out);
  if (!defects.empty()) {
    throw Error(ErrorCode::kTopology, "result fails validation: " + defects.front().message);
  }
  if (both_closed && !boundary_loops(out).empty()) {
    throw Error(ErrorCode::kTopology, "result of closed inputs has open boundaries");
  }

  size_t survivors = 0;
  for (int t : out.live_triangles()) survivors += originals.count(triangle_key(out, t));
  report.triangles_added = out.triangle_count() - survivors;
  report.triangles_deleted = sides_[0].input->triangle_count() + sides_[1].input->triangle_count() - survivors;

  {
    SeamStats st;
    std::vector<double> lens;
    for (const auto& seam : result.seams) {
      for (size_t i = 0; i < seam.size(); ++i) {
        const int a = seam[i], b = seam[(i + 1) % seam.size()];
        if (a != b && out.has_edge(a, b)) lens.push_back(distance(out.position(a), out.position(b)));
        st.max_distance_a = std::max(st.max_distance_a, targets[0].distance_to(out.position(a)));
        st.max_distance_b = std::max(st.max_distance_b, targets[1].distance_to(out.position(a)));
      }
    }
    st.edges = lens.size();
    if (!lens.empty()) {
      st.mean = std::accumulate(lens.begin(), lens.end(), 0.0) / double(lens.size());
      double var = 0.0;
      for (double l : lens) var += (l - st.mean) * (l - st.mean);
      st.stddev = std::sqrt(var / double(lens.size()));
    }
    report.seam = st;
  }
  if (emptied[0] || emptied[1]) report.warnings.push_back("an input was consumed entirely by the intersection set");

  report.success = true;
  timer.reset();
  result.mesh = std::move(out);
  result.report = std::move(report);
  return result;
}

}  // namespace

BooleanResult boolean_op(const TriMesh& mesh_a, const TriMesh& mesh_b, const BooleanParams& params) {
  params.check();
  Pipeline pipeline(mesh_a, mesh_b, params);
  return pipeline.run();
}

}  // namespace ambool
