#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "ambool/error.hpp"
#include "ambool/primitives.hpp"
#include "ambool/remesh.hpp"

using namespace ambool;

namespace {

// Equilateral triangulated patch: rows offset by half a cell.
TriMesh equilateral_grid(int nx, int ny, double side) {
  std::vector<Vec3> pts;
  const double h = side * std::sqrt(3.0) / 2.0;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) pts.push_back({i * side + (j % 2) * side * 0.5, j * h, 0});
  }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (j % 2 == 0) {
        tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      }
    }
  }
  return TriMesh(pts, tris);
}

int vertex_near(const TriMesh& m, const Vec3& p) {
  for (int v : m.live_vertices()) {
    if (distance(m.position(v), p) < 1e-9) return v;
  }
  return -1;
}

RemeshStats run(TriMesh& m, const RemeshParams& p, ConstraintSet& c) {
  Region r = Region::all(m);
  return remesh_region(m, r, p, c);
}

// Tags the twelve box creases as straight polylines: corners fixed, crease
// interiors bound to their polyline.
ConstraintSet box_creases(const TriMesh& box) {
  ConstraintSet c;
  std::map<std::pair<int, int>, int> ids;
  auto corner_of = [&](const Vec3& p, const Aabb& b) {
    return std::array<int, 3>{p.x == b.lo.x ? 0 : (p.x == b.hi.x ? 1 : -1),
                              p.y == b.lo.y ? 0 : (p.y == b.hi.y ? 1 : -1),
                              p.z == b.lo.z ? 0 : (p.z == b.hi.z ? 1 : -1)};
  };
  const Aabb b = box.bounds();
  for (const EdgeKey& e : box.edges()) {
    const auto ka = corner_of(box.position(e.a), b), kb = corner_of(box.position(e.b), b);
    // Both endpoints on the same crease: two shared extreme coordinates.
    int shared = 0;
    for (int k = 0; k < 3; ++k) shared += ka[k] >= 0 && ka[k] == kb[k];
    if (shared < 2) continue;
    std::array<int, 3> key{};
    for (int k = 0; k < 3; ++k) key[k] = (ka[k] >= 0 && ka[k] == kb[k]) ? ka[k] : -1;
    const int code = (key[0] + 1) * 9 + (key[1] + 1) * 3 + (key[2] + 1);
    auto it = ids.find({code, 0});
    if (it == ids.end()) {
      Vec3 p0, p1;
      for (int k = 0; k < 3; ++k) {
        const double lo = k == 0 ? b.lo.x : (k == 1 ? b.lo.y : b.lo.z);
        const double hi = k == 0 ? b.hi.x : (k == 1 ? b.hi.y : b.hi.z);
        p0[k] = key[k] < 0 ? lo : (key[k] == 0 ? lo : hi);
        p1[k] = key[k] < 0 ? hi : (key[k] == 0 ? lo : hi);
      }
      c.polylines.push_back({p0, p1});
      it = ids.emplace(std::pair{code, 0}, int(c.polylines.size()) - 1).first;
    }
    c.add_feature_edge(e, it->second);
    for (int v : {e.a, e.b}) {
      const auto k = corner_of(box.position(v), b);
      const bool corner = k[0] >= 0 && k[1] >= 0 && k[2] >= 0;
      c.set_binding(v, corner ? VertexBinding::fixed() : VertexBinding::polyline(it->second));
    }
  }
  return c;
}

// Node-to-node connections of the feature graph, as position pairs.
std::multiset<std::pair<std::array<double, 3>, std::array<double, 3>>> feature_topology(const TriMesh& m,
                                                                                        const ConstraintSet& c) {
  std::multiset<std::pair<std::array<double, 3>, std::array<double, 3>>> out;
  const auto nodes = c.feature_nodes(m);
  const std::set<int> node_set(nodes.begin(), nodes.end());
  auto key = [&](int v) {
    const Vec3& p = m.position(v);
    return std::array<double, 3>{p.x, p.y, p.z};
  };
  for (int n : nodes) {
    for (int x : m.vertex_neighbors(n)) {
      if (!c.is_feature_edge(EdgeKey(n, x))) continue;
      int prev = n, cur = x;
      while (!node_set.count(cur)) {
        int next = -1;
        for (int y : m.vertex_neighbors(cur)) {
          if (y != prev && c.is_feature_edge(EdgeKey(cur, y))) next = y;
        }
        prev = cur;
        cur = next;
      }
      out.emplace(std::min(key(n), key(cur)), std::max(key(n), key(cur)));
    }
  }
  return out;
}

}  // namespace

TEST(RemeshParams, Validation) {
  RemeshParams p = RemeshParams::with_target(1.0);
  EXPECT_DOUBLE_EQ(p.l_min, 0.4);
  EXPECT_NO_THROW(p.check());
  p.l_min = 2.0;
  EXPECT_THROW(p.check(), Error);
  p = RemeshParams::with_target(1.0);
  p.alpha = 1.5;
  EXPECT_THROW(p.check(), Error);
}

TEST(TriangleQuality, KnownValues) {
  EXPECT_NEAR(triangle_quality({0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}), 1.0, 1e-12);
  // Right isosceles: r = (2 - sqrt2)/2, R = sqrt2/2.
  EXPECT_NEAR(triangle_quality({0, 0, 0}, {1, 0, 0}, {0, 1, 0}), 2.0 * (2.0 - std::sqrt(2.0)) / 2.0 / (std::sqrt(2.0) / 2.0),
              1e-12);
  EXPECT_EQ(triangle_quality({0, 0, 0}, {1, 0, 0}, {2, 0, 0}), 0.0);
}

TEST(RemeshRegion, EquilateralGridIsAFixedPoint) {
  TriMesh m = equilateral_grid(6, 6, 1.0);
  ConstraintSet c;
  RemeshParams p = RemeshParams::with_target(1.2);
  const RemeshStats s = run(m, p, c);
  EXPECT_EQ(s.splits, 0u);
  EXPECT_EQ(s.collapses, 0u);
  EXPECT_EQ(s.flips, 0u);
}

TEST(RemeshRegion, LongEdgeIsSplitBelowLimit) {
  // One triangle whose base is 2.5 l_max.
  TriMesh m({{0, 0, 0}, {2.5, 0, 0}, {1.25, 0.5, 0}}, {{0, 1, 2}});
  ConstraintSet c;
  RemeshParams p = RemeshParams::with_target(1.0);
  run(m, p, c);
  for (const EdgeKey& e : m.edges()) EXPECT_LE(m.edge_length(e), 1.0 * 1.01);
  EXPECT_TRUE(validate(m).empty());
}

TEST(RemeshRegion, IcosahedronRefinement) {
  TriMesh m = make_icosahedron(1.0);
  const double edge = m.edge_length(m.edges()[0]);
  ConstraintSet c;
  std::vector<ProjectionTarget> targets{ProjectionTarget::sphere({}, 1.0)};
  for (int v : m.live_vertices()) c.set_binding(v, VertexBinding::on_surface(0));
  RemeshParams p = RemeshParams::with_target(0.2 * edge);
  p.passes = 3;
  Region r = Region::all(m);
  remesh_region(m, r, p, c, targets);
  EXPECT_TRUE(validate(m).empty());
  EXPECT_TRUE(boundary_loops(m).empty());
  EXPECT_EQ(euler_characteristic(m), 2);
  for (const EdgeKey& e : m.edges()) EXPECT_LE(m.edge_length(e), p.l_max * 1.01);
  for (int v : m.live_vertices()) EXPECT_NEAR(length(m.position(v)), 1.0, 1e-12);
  EXPECT_GT(m.triangle_count(), 20u * 16u);
}

TEST(SplitPass, MidpointWhenCurvedOff) {
  TriMesh m({{0, 0, 0}, {1.01, 0, 0}, {0.505, 0.3, 0}}, {{0, 1, 2}});
  ConstraintSet c;
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  EXPECT_EQ(split_pass(ctx, RemeshParams::with_target(1.0)), 1u);
  EXPECT_GE(vertex_near(m, {0.505, 0, 0}), 0);
}

TEST(SplitPass, FeatureEdgeStaysLinearAndTagged) {
  TriMesh m = make_geodesic_sphere({}, 1.0, 2);
  const EdgeKey e = m.edges()[0];
  ConstraintSet c;
  c.polylines.push_back({m.position(e.a), m.position(e.b)});
  c.add_feature_edge(e, 0);
  c.set_binding(e.a, VertexBinding::fixed());
  c.set_binding(e.b, VertexBinding::fixed());
  Region r(m, std::vector<int>{});
  std::array<int, 2> inc{};
  m.edge_triangles(e, inc);
  r.add(inc[0]);
  r.add(inc[1]);
  RemeshParams p = RemeshParams::with_target(0.99 * m.edge_length(e));
  p.use_curved_split = true;
  RemeshContext ctx{m, r, c, {}};
  const Vec3 mid = (m.position(e.a) + m.position(e.b)) * 0.5;
  split_pass(ctx, p);
  const int v = vertex_near(m, mid);
  ASSERT_GE(v, 0);
  EXPECT_TRUE(c.is_feature_edge(EdgeKey(e.a, v)));
  EXPECT_TRUE(c.is_feature_edge(EdgeKey(v, e.b)));
}

TEST(SplitPass, CurvedSplitOnPlaneStaysPlanar) {
  TriMesh m = make_sheet(0, 4, 0, 4, 0.25, 2, 2);
  ConstraintSet c;
  RemeshParams p = RemeshParams::with_target(0.7);
  p.use_curved_split = true;
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  EXPECT_GT(split_pass(ctx, p), 0u);
  for (int v : m.live_vertices()) EXPECT_DOUBLE_EQ(m.position(v).z, 0.25);
}

TEST(SplitPass, CurvedSplitBulgesOnSphere) {
  TriMesh m = make_icosahedron(1.0);
  const EdgeKey e = m.edges()[0];
  const Vec3 curved = split_position(m, e, true);
  const Vec3 mid = split_position(m, e, false);
  EXPECT_GT(length(curved), length(mid));
  EXPECT_LT(length(curved), 1.0 + 1e-9);
}

TEST(CollapsePass, FreeInteriorEdgeGoesToMidpoint) {
  TriMesh m = make_sheet(0, 4, 0, 4, 0, 4, 4);
  const int a = vertex_near(m, {2, 2, 0});
  // Pull a neighbour close to make a 0.3 edge.
  int b = vertex_near(m, {3, 2, 0});
  ASSERT_TRUE(m.has_edge(a, b));
  m.set_position(b, {2.3, 2, 0});
  ConstraintSet c;
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  RemeshParams p = RemeshParams::with_target(2.5);
  p.l_min = 0.4;
  p.min_opening_angle = 0.0;
  EXPECT_GE(collapse_pass(ctx, p), 1u);
  EXPECT_GE(vertex_near(m, {2.15, 2, 0}), 0);
  EXPECT_TRUE(validate(m).empty());
}

TEST(CollapsePass, CollapsesOntoConstrainedEndpoint) {
  TriMesh m = make_sheet(0, 4, 0, 4, 0, 4, 4);
  const int a = vertex_near(m, {2, 2, 0});
  const int b = vertex_near(m, {2, 3, 0});
  m.set_position(b, {2, 2.3, 0});
  ConstraintSet c;
  c.polylines.push_back({{0, 2, 0}, {4, 2, 0}});
  for (int x = 0; x < 4; ++x) {
    c.add_feature_edge(EdgeKey(vertex_near(m, {double(x), 2, 0}), vertex_near(m, {double(x + 1), 2, 0})), 0);
  }
  for (int x = 0; x <= 4; ++x) {
    c.set_binding(vertex_near(m, {double(x), 2, 0}), (x == 0 || x == 4) ? VertexBinding::fixed() : VertexBinding::polyline(0));
  }
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  RemeshParams p = RemeshParams::with_target(2.5);
  p.l_min = 0.4;
  p.min_opening_angle = 0.0;
  collapse_pass(ctx, p);
  EXPECT_TRUE(m.vertex_alive(a));
  EXPECT_FALSE(m.vertex_alive(b));
  EXPECT_EQ(m.position(a), (Vec3{2, 2, 0}));
}

TEST(CollapsePass, DifferentPolylinesAcrossNonFeatureEdgeIsSkipped) {
  TriMesh m = make_sheet(0, 4, 0, 4, 0, 4, 4);
  const int a = vertex_near(m, {2, 2, 0});
  const int b = vertex_near(m, {3, 2, 0});
  m.set_position(b, {2.3, 2, 0});
  ConstraintSet c;
  c.polylines.push_back({{2, 0, 0}, {2, 4, 0}});
  c.polylines.push_back({{2.3, 0, 0}, {2.3, 4, 0}});
  c.set_binding(a, VertexBinding::polyline(0));
  c.set_binding(b, VertexBinding::polyline(1));
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  RemeshParams p = RemeshParams::with_target(2.5);
  p.l_min = 0.4;
  p.min_opening_angle = 0.0;
  collapse_pass(ctx, p);
  EXPECT_TRUE(m.vertex_alive(a));
  EXPECT_TRUE(m.vertex_alive(b));
  EXPECT_TRUE(m.has_edge(a, b));
}

TEST(FlipPass, Cases) {
  RemeshParams p = RemeshParams::with_target(10.0);
  {
    // 1 x 3 quad split along its long diagonal.
    TriMesh m({{0, 0, 0}, {3, 0, 0}, {3, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    // Skewed so that 0-2 is the long diagonal.
    m.set_position(2, {3.5, 1, 0});
    m.set_position(3, {0.5, 1, 0});
    ConstraintSet c;
    Region r = Region::all(m);
    RemeshContext ctx{m, r, c, {}};
    EXPECT_EQ(flip_pass(ctx, p), 1u);
    EXPECT_TRUE(m.has_edge(1, 3));
  }
  {
    TriMesh m({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    ConstraintSet c;
    Region r = Region::all(m);
    RemeshContext ctx{m, r, c, {}};
    EXPECT_EQ(flip_pass(ctx, p), 0u);
  }
  {
    TriMesh m({{0, 0, 0}, {3, 0, 0}, {3.5, 1, 0}, {0.5, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    ConstraintSet c;
    c.add_feature_edge(EdgeKey(0, 2), 0);
    Region r = Region::all(m);
    RemeshContext ctx{m, r, c, {}};
    EXPECT_EQ(flip_pass(ctx, p), 0u);
    EXPECT_TRUE(m.has_edge(0, 2));
  }
}

TEST(SmoothPass, FixedPointAndZeroAlpha) {
  TriMesh m = equilateral_grid(4, 4, 1.0);
  ConstraintSet c;
  RemeshParams p = RemeshParams::with_target(2.0);
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  const TriMesh before = m;
  p.alpha = 0.0;
  EXPECT_EQ(smooth_pass(ctx, p), 0u);
  p.alpha = 0.5;
  smooth_pass(ctx, p);
  for (int v : m.live_vertices()) {
    // Interior vertices of a regular grid already sit at their centroid.
    EXPECT_NEAR(distance(m.position(v), before.position(v)), 0.0, 1e-12);
  }
}

TEST(SmoothPass, PerturbedHexagonMovesByClampedWeight) {
  const double s = 2.0;
  std::vector<Vec3> pts{{0.1, -0.05, 0}};
  for (int k = 0; k < 6; ++k) pts.push_back({s * std::cos(k * kPi / 3), s * std::sin(k * kPi / 3), 0});
  std::vector<Triangle> tris;
  for (int k = 0; k < 6; ++k) tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
  TriMesh m(pts, tris);
  // Voronoi area of the centre: for each (acute) triangle, the quadrilateral
  // bounded by the edge midpoints and the circumcentre.
  double voronoi = 0.0;
  for (int k = 0; k < 6; ++k) {
    const Vec3 p = pts[0], q = pts[1 + k], r = pts[1 + (k + 1) % 6];
    const Vec3 a = q - p, b = r - p;
    const Vec3 n = cross(a, b);
    const Vec3 cc = p + cross(n, a) * (dot(b, b) / (2 * dot(n, n))) + cross(b, n) * (dot(a, a) / (2 * dot(n, n)));
    const Vec3 mq = (p + q) * 0.5, mr = (p + r) * 0.5;
    voronoi += 0.5 * length(cross(mq - p, cc - p)) + 0.5 * length(cross(cc - p, mr - p));
  }
  EXPECT_NEAR(mixed_area(m, 0), voronoi, 1e-12);
  for (double alpha : {0.5, 1.0}) {
    TriMesh copy = m;
    ConstraintSet c;
    RemeshParams p = RemeshParams::with_target(10.0);
    p.alpha = alpha;
    p.smooth_boundary = false;
    Region r = Region::all(copy);
    RemeshContext ctx{copy, r, c, {}};
    smooth_pass(ctx, p);
    const double w = std::clamp(alpha / voronoi, 0.0, 1.0);
    const Vec3 centroid{0, 0, 0};
    EXPECT_NEAR(distance(copy.position(0), pts[0]), w * distance(centroid, pts[0]), 1e-12);
    EXPECT_LT(length(copy.position(0)), length(pts[0]));
  }
}

TEST(RemeshProperties, FeatureTopologySurvivesPasses) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    TriMesh box = make_box({0, 0, 0}, {1.0, 1.3, 0.8}, 3 + trial % 3);
    ConstraintSet c = box_creases(box);
    const auto before = feature_topology(box, c);
    ASSERT_EQ(c.feature_nodes(box).size(), 8u);
    ASSERT_EQ(before.size(), 24u);
    const double l = std::uniform_real_distribution<double>(0.08, 0.4)(rng);
    RemeshParams p = RemeshParams::with_target(l);
    p.passes = 3;
    Region r = Region::all(box);
    for (int v : box.live_vertices()) {
      if (c.binding(v).kind == VertexBinding::Kind::kFree) c.set_binding(v, VertexBinding::free());
    }
    remesh_region(box, r, p, c);
    ASSERT_TRUE(validate(box).empty()) << "trial " << trial;
    EXPECT_EQ(feature_topology(box, c), before) << "trial " << trial << " l_max " << l;
    EXPECT_EQ(euler_characteristic(box), 2);
  }
}

TEST(RemeshProperties, EdgesBoundedAfterFullSequence) {
  TriMesh m = make_torus({}, 2.0, 0.7, 20, 10);
  ConstraintSet c;
  RemeshParams p = RemeshParams::with_target(0.3);
  p.passes = 2;
  run(m, p, c);
  EXPECT_TRUE(validate(m).empty());
  EXPECT_EQ(euler_characteristic(m), 0);
  for (const EdgeKey& e : m.edges()) EXPECT_LE(m.edge_length(e), 0.3 * 1.01);
}

TEST(RemeshProperties, SmoothingKeepsCounts) {
  TriMesh m = make_geodesic_sphere({}, 1.0, 6);
  const size_t nv = m.vertex_count(), nt = m.triangle_count();
  ConstraintSet c;
  Region r = Region::all(m);
  RemeshContext ctx{m, r, c, {}};
  RemeshParams p = RemeshParams::with_target(1.0);
  p.alpha = 1.0;
  EXPECT_GT(smooth_pass(ctx, p), 0u);
  EXPECT_EQ(m.vertex_count(), nv);
  EXPECT_EQ(m.triangle_count(), nt);
}

TEST(RemeshProperties, PassesStayValidOnRandomRegions) {
  std::mt19937 rng(17);
  TriMesh m = make_geodesic_sphere({}, 1.0, 8);
  std::vector<ProjectionTarget> targets{ProjectionTarget::sphere({}, 1.0)};
  ConstraintSet c;
  for (int v : m.live_vertices()) c.set_binding(v, VertexBinding::on_surface(0));
  for (int round = 0; round < 8; ++round) {
    const auto live = m.live_triangles();
    std::vector<int> seed;
    for (int k = 0; k < 30; ++k) seed.push_back(live[std::uniform_int_distribution<size_t>(0, live.size() - 1)(rng)]);
    Region r(m, seed);
    r.grow_one_ring(m);
    r.grow_one_ring(m);
    RemeshParams p = RemeshParams::with_target(std::uniform_real_distribution<double>(0.05, 0.3)(rng));
    remesh_region(m, r, p, c, targets);
    ASSERT_TRUE(validate(m).empty()) << "round " << round;
    EXPECT_EQ(euler_characteristic(m), 2);
  }
}
