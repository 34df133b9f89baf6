#include "ambool/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ambool/error.hpp"
#include "ambool/parallel.hpp"

namespace ambool {

void RemeshParams::check() const {
  if (!(l_max > 0.0) || !(l_min > 0.0) || !(l_min < l_max)) {
    throw Error(ErrorCode::kInvalidArgument, "remesh lengths must satisfy 0 < l_min < l_max");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "smoothing weight must lie in [0, 1]");
  if (passes < 0) throw Error(ErrorCode::kInvalidArgument, "pass count must be non-negative");
}

RemeshStats& RemeshStats::operator+=(const RemeshStats& o) {
  splits += o.splits;
  collapses += o.collapses;
  flips += o.flips;
  smoothed += o.smoothed;
  rejected_collapses += o.rejected_collapses;
  rejected_flips += o.rejected_flips;
  return *this;
}

Region::Region(const TriMesh& mesh, std::span<const int> triangles) : mask_(mesh.triangle_slots(), 0) {
  for (int t : triangles) add(t);
}

Region Region::all(const TriMesh& mesh) {
  const std::vector<int> live = mesh.live_triangles();
  return Region(mesh, live);
}

void Region::add(int t) {
  if (t < 0) return;
  if (size_t(t) >= mask_.size()) mask_.resize(size_t(t) + 1, 0);
  mask_[t] = 1;
}

void Region::remove(int t) {
  if (contains(t)) mask_[t] = 0;
}

std::vector<int> Region::triangles(const TriMesh& mesh) const {
  std::vector<int> out;
  for (size_t t = 0; t < mask_.size(); ++t) {
    if (mask_[t] && mesh.triangle_alive(int(t))) out.push_back(int(t));
  }
  return out;
}

size_t Region::size(const TriMesh& mesh) const {
  size_t n = 0;
  for (size_t t = 0; t < mask_.size(); ++t) n += mask_[t] && mesh.triangle_alive(int(t));
  return n;
}

void Region::grow_one_ring(const TriMesh& mesh) {
  for (int v : vertices(mesh)) {
    for (int t : mesh.vertex_triangles(v)) add(t);
  }
}

std::vector<int> Region::vertices(const TriMesh& mesh) const {
  std::vector<int> out;
  for (int t : triangles(mesh)) {
    for (int v : mesh.triangle(t)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EdgeKey> Region::edges(const TriMesh& mesh) const {
  std::vector<EdgeKey> out;
  for (int t : triangles(mesh)) {
    const Triangle& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) out.emplace_back(tri[k], tri[(k + 1) % 3]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
  const double area2 = length(cross(b - a, c - a));
  const double perimeter = la + lb + lc;
  if (area2 <= 0.0 || perimeter <= 0.0) return 0.0;
  // r = 2K / P and R = abc / 4K, so 2r/R = 16 K^2 / (P abc) with K = area2 / 2.
  return 4.0 * area2 * area2 / (perimeter * la * lb * lc);
}

namespace {

double cotangent(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex, w = q - apex;
  const double s = length(cross(u, w));
  return s > 0.0 ? dot(u, w) / s : 0.0;
}

}  // namespace

double mixed_area(const TriMesh& mesh, int v) {
  double area = 0.0;
  for (int t : mesh.vertex_triangles(v)) {
    const Triangle& tri = mesh.triangle(t);
    int k = 0;
    while (tri[k] != v) ++k;
    const Vec3& p = mesh.position(v);
    const Vec3& q = mesh.position(tri[(k + 1) % 3]);
    const Vec3& r = mesh.position(tri[(k + 2) % 3]);
    const double full = 0.5 * length(cross(q - p, r - p));
    const bool obtuse_p = dot(q - p, r - p) < 0.0;
    const bool obtuse_q = dot(p - q, r - q) < 0.0;
    const bool obtuse_r = dot(p - r, q - r) < 0.0;
    if (obtuse_p) {
      area += full / 2.0;
    } else if (obtuse_q || obtuse_r) {
      area += full / 4.0;
    } else {
      area += (distance_squared(p, r) * cotangent(q, p, r) + distance_squared(p, q) * cotangent(r, p, q)) / 8.0;
    }
  }
  return area;
}

Vec3 split_position(const TriMesh& mesh, const EdgeKey& e, bool curved) {
  const Vec3& p0 = mesh.position(e.a);
  const Vec3& p1 = mesh.position(e.b);
  const Vec3 mid = (p0 + p1) * 0.5;
  if (!curved) return mid;
  const Vec3 n0 = mesh.vertex_normal(e.a);
  const Vec3 n1 = mesh.vertex_normal(e.b);
  if (length_squared(n0) == 0.0 || length_squared(n1) == 0.0) return mid;
  if (dot(n0, n1) < std::cos(kPi * 179.0 / 180.0)) return mid;
  const Vec3 d = p1 - p0;
  const Vec3 b1 = p0 + (d - n0 * dot(d, n0)) / 3.0;
  const Vec3 b2 = p1 - (d - n1 * dot(d, n1)) / 3.0;
  return (p0 + b1 * 3.0 + b2 * 3.0 + p1) / 8.0;
}

namespace {

void snap(RemeshContext& ctx, int v) {
  const VertexBinding b = ctx.constraints.binding(v);
  if (b.kind == VertexBinding::Kind::kOnPolyline || b.kind == VertexBinding::Kind::kOnSurface) {
    const Vec3 p = reproject(b, ctx.mesh.position(v), ctx.constraints, ctx.targets);
    if (!(p == ctx.mesh.position(v))) ctx.mesh.set_position(v, p);
  }
}

double min_opening_angle(const TriMesh& mesh, const EdgeKey& e) {
  std::array<int, 2> inc{};
  const int n = mesh.edge_triangles(e, inc);
  double best = kPi;
  for (int i = 0; i < n && i < 2; ++i) {
    const Vec3& o = mesh.position(mesh.opposite_vertex(inc[i], e));
    best = std::min(best, angle_between(mesh.position(e.a) - o, mesh.position(e.b) - o));
  }
  return best;
}

bool is_node(const TriMesh& mesh, const ConstraintSet& c, int v) {
  const VertexBinding b = c.binding(v);
  if (b.kind == VertexBinding::Kind::kFixed) return true;
  return c.feature_degree(mesh, v) != 2;
}

struct CollapsePlan {
  int keep = -1;
  Vec3 pos;
};

std::optional<CollapsePlan> plan_collapse(RemeshContext& ctx, const EdgeKey& e) {
  const TriMesh& mesh = ctx.mesh;
  const ConstraintSet& c = ctx.constraints;
  const int a = e.a, b = e.b;
  const VertexBinding ba = c.binding(a), bb = c.binding(b);
  if (ba.kind == VertexBinding::Kind::kFixed && bb.kind == VertexBinding::Kind::kFixed) return std::nullopt;
  const bool fa = ba.is_feature(), fb = bb.is_feature();
  const bool border_a = mesh.is_boundary_vertex(a), border_b = mesh.is_boundary_vertex(b);
  const bool feature_edge = c.is_feature_edge(e);
  const bool border_edge = mesh.is_boundary_edge(e);
  auto keep_vertex = [&](int v) { return CollapsePlan{v, mesh.position(v)}; };
  auto midpoint = [&] {
    const int keep = (ba.kind == VertexBinding::Kind::kFree && bb.kind != VertexBinding::Kind::kFree) ? b : a;
    const Vec3 mid = (mesh.position(a) + mesh.position(b)) * 0.5;
    return CollapsePlan{keep, reproject(c.binding(keep), mid, c, ctx.targets)};
  };

  if (feature_edge) {
    const bool na = is_node(mesh, c, a), nb = is_node(mesh, c, b);
    if (na && nb) return std::nullopt;
    for (int x : mesh.vertex_neighbors(a)) {
      if (x != b && c.is_feature_edge(EdgeKey(a, x)) && c.is_feature_edge(EdgeKey(b, x))) return std::nullopt;
    }
    if (na) return keep_vertex(a);
    if (nb) return keep_vertex(b);
    if (border_a != border_b && !border_edge) return keep_vertex(border_a ? a : b);
    return midpoint();
  }
  const bool ca = fa || border_a, cb = fb || border_b;
  if (ca && cb && !border_edge) return std::nullopt;
  if (border_edge) {
    if (fa && fb) return std::nullopt;
    if (fa) return keep_vertex(a);
    if (fb) return keep_vertex(b);
    return midpoint();
  }
  if (ca) return keep_vertex(a);
  if (cb) return keep_vertex(b);
  return midpoint();
}

bool stretches_beyond(const TriMesh& mesh, const EdgeKey& e, const Vec3& pos, double l_max) {
  for (int v : {e.a, e.b}) {
    for (int x : mesh.vertex_neighbors(v)) {
      if (x == e.a || x == e.b) continue;
      if (distance(pos, mesh.position(x)) > l_max) return true;
    }
  }
  return false;
}

}  // namespace

size_t split_pass(RemeshContext& ctx, const RemeshParams& params) {
  TriMesh& mesh = ctx.mesh;
  size_t count = 0;
  for (int round = 0; round < 64; ++round) {
    std::vector<std::pair<double, EdgeKey>> queue;
    for (const EdgeKey& e : ctx.region.edges(mesh)) {
      const double len = mesh.edge_length(e);
      if (len > params.l_max) queue.emplace_back(len, e);
    }
    if (queue.empty()) break;
    std::sort(queue.begin(), queue.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    for (const auto& [len0, e] : queue) {
      if (!mesh.has_edge(e.a, e.b) || mesh.edge_length(e) <= params.l_max) continue;
      const bool linear = mesh.is_boundary_edge(e) || ctx.constraints.is_feature_edge(e);
      const Vec3 pos = split_position(mesh, e, params.use_curved_split && !linear);
      const SplitResult r = split_edge(mesh, e, pos, &ctx.constraints);
      for (int i = 0; i < r.new_count; ++i) {
        if (ctx.region.contains(r.parents[i])) ctx.region.add(r.new_triangles[i]);
      }
      snap(ctx, r.vertex);
      ++count;
    }
  }
  return count;
}

size_t collapse_pass(RemeshContext& ctx, const RemeshParams& params, size_t* rejected) {
  TriMesh& mesh = ctx.mesh;
  std::vector<std::pair<double, EdgeKey>> queue;
  for (const EdgeKey& e : ctx.region.edges(mesh)) {
    const double len = mesh.edge_length(e);
    if (len < params.l_min || min_opening_angle(mesh, e) < params.min_opening_angle) queue.emplace_back(len, e);
  }
  std::sort(queue.begin(), queue.end());
  size_t count = 0;
  for (const auto& [len0, e] : queue) {
    if (!mesh.vertex_alive(e.a) || !mesh.vertex_alive(e.b) || !mesh.has_edge(e.a, e.b)) continue;
    if (mesh.edge_length(e) >= params.l_min && min_opening_angle(mesh, e) >= params.min_opening_angle) continue;
    const auto plan = plan_collapse(ctx, e);
    if (!plan || stretches_beyond(mesh, e, plan->pos, params.l_max * params.max_collapse_stretch) || !mesh.can_collapse(e, plan->pos, plan->keep)) {
      if (rejected) ++*rejected;
      continue;
    }
    const VertexBinding removed_binding = ctx.constraints.binding(e.other(plan->keep));
    const CollapseResult r = collapse_edge(mesh, e, plan->pos, plan->keep, &ctx.constraints);
    if (ctx.constraints.binding(r.kept).kind == VertexBinding::Kind::kFree &&
        removed_binding.kind == VertexBinding::Kind::kOnSurface) {
      ctx.constraints.set_binding(r.kept, removed_binding);
    }
    ++count;
  }
  return count;
}

size_t flip_pass(RemeshContext& ctx, const RemeshParams& params, size_t* rejected) {
  TriMesh& mesh = ctx.mesh;
  const double cos_limit = std::cos(params.max_flip_dihedral);
  size_t count = 0;
  for (const EdgeKey& e : ctx.region.edges(mesh)) {
    if (!mesh.has_edge(e.a, e.b) || ctx.constraints.is_feature_edge(e)) continue;
    std::array<int, 2> inc{};
    if (mesh.edge_triangles(e, inc) != 2) continue;
    if (!ctx.region.contains(inc[0]) || !ctx.region.contains(inc[1])) continue;
    const int c = mesh.opposite_vertex(inc[0], e);
    const int d = mesh.opposite_vertex(inc[1], e);
    const double len = mesh.edge_length(e);
    if (!(distance(mesh.position(c), mesh.position(d)) < len * (1.0 - 1e-9))) continue;
    if (dot(mesh.triangle_normal(inc[0]), mesh.triangle_normal(inc[1])) < cos_limit) continue;
    const auto p0 = mesh.triangle_points(inc[0]);
    const auto p1 = mesh.triangle_points(inc[1]);
    const double before = std::min(triangle_quality(p0[0], p0[1], p0[2]), triangle_quality(p1[0], p1[1], p1[2]));
    const Vec3 &pa = mesh.position(e.a), &pb = mesh.position(e.b), &pc = mesh.position(c), &pd = mesh.position(d);
    const double after = std::min(triangle_quality(pc, pa, pd), triangle_quality(pd, pb, pc));
    if (after < 0.5 * before) {
      if (rejected) ++*rejected;
      continue;
    }
    try {
      flip_edge(mesh, e, &ctx.constraints);
      ++count;
    } catch (const Error&) {
      if (rejected) ++*rejected;
    }
  }
  return count;
}

size_t smooth_pass(RemeshContext& ctx, const RemeshParams& params) {
  TriMesh& mesh = ctx.mesh;
  const ConstraintSet& c = ctx.constraints;
  if (params.alpha == 0.0) return 0;
  std::vector<int> movable;
  for (int v : ctx.region.vertices(mesh)) {
    const VertexBinding b = c.binding(v);
    if (b.kind == VertexBinding::Kind::kFixed) continue;
    if (b.kind == VertexBinding::Kind::kOnPolyline && is_node(mesh, c, v)) continue;
    if (!params.smooth_boundary && mesh.is_boundary_vertex(v)) continue;
    const auto tris = mesh.vertex_triangles(v);
    if (!std::all_of(tris.begin(), tris.end(), [&](int t) { return ctx.region.contains(t); })) continue;
    movable.push_back(v);
  }
  std::vector<Vec3> target(movable.size());
  parallel_for(movable.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const int v = movable[i];
      const VertexBinding b = c.binding(v);
      std::vector<int> ring;
      for (int x : mesh.vertex_neighbors(v)) {
        if (b.kind == VertexBinding::Kind::kOnPolyline) {
          if (c.is_feature_edge(EdgeKey(v, x))) ring.push_back(x);
        } else if (mesh.is_boundary_vertex(v)) {
          if (mesh.is_boundary_edge(EdgeKey(v, x))) ring.push_back(x);
        } else {
          ring.push_back(x);
        }
      }
      const Vec3& p = mesh.position(v);
      if (ring.empty()) {
        target[i] = p;
        continue;
      }
      Vec3 centroid;
      for (int x : ring) centroid += mesh.position(x);
      centroid = centroid / double(ring.size());
      const double area = mixed_area(mesh, v);
      const double w = area > 0.0 ? std::clamp(params.alpha / area, 0.0, 1.0) : 0.0;
      target[i] = reproject(b, p * (1.0 - w) + centroid * w, c, ctx.targets);
    }
  });

  size_t moved = 0;
  for (size_t i = 0; i < movable.size(); ++i) {
    const int v = movable[i];
    const Vec3 old = mesh.position(v);
    if (target[i] == old) continue;
    std::vector<Vec3> normals;
    for (int t : mesh.vertex_triangles(v)) normals.push_back(mesh.triangle_normal(t));
    std::vector<double> lengths;
    const std::vector<int> ring = mesh.vertex_neighbors(v);
    for (int x : ring) lengths.push_back(distance(old, mesh.position(x)));
    mesh.set_position(v, target[i]);
    bool ok = true;
    size_t k = 0;
    for (int t : mesh.vertex_triangles(v)) {
      if (dot(mesh.triangle_normal(t), normals[k++]) <= 0.0) ok = false;
    }
    for (size_t j = 0; j < ring.size() && ok; ++j) {
      const double len = distance(target[i], mesh.position(ring[j]));
      if (len > params.l_max && len > lengths[j]) ok = false;
    }
    if (ok) {
      ++moved;
    } else {
      mesh.set_position(v, old);
    }
  }
  return moved;
}

RemeshStats remesh_region(TriMesh& mesh, Region& region, const RemeshParams& params, ConstraintSet& constraints,
                          std::span<const ProjectionTarget> targets) {
  params.check();
  RemeshContext ctx{mesh, region, constraints, targets};
  RemeshStats stats;
  for (int pass = 0; pass < params.passes; ++pass) {
    stats.splits += split_pass(ctx, params);
    stats.collapses += collapse_pass(ctx, params, &stats.rejected_collapses);
    stats.flips += flip_pass(ctx, params, &stats.rejected_flips);
    stats.smoothed += smooth_pass(ctx, params);
  }
  return stats;
}

}  // namespace ambool
