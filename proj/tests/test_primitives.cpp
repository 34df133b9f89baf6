#include <gtest/gtest.h>

#include "ambool/primitives.hpp"

using namespace ambool;

namespace {

void expect_closed_sphere_like(const TriMesh& m) {
  EXPECT_TRUE(validate(m).empty());
  EXPECT_TRUE(boundary_loops(m).empty());
  EXPECT_EQ(euler_characteristic(m), 2);
}

}  // namespace

TEST(Primitives, ClosedSolidsAreOutward) {
  const double pi = kPi;
  const TriMesh tet = make_tetrahedron(1.0);
  expect_closed_sphere_like(tet);
  EXPECT_NEAR(signed_volume(tet), 1.0 / (6.0 * std::sqrt(2.0)), 1e-12);

  const TriMesh ico = make_icosahedron(1.0);
  expect_closed_sphere_like(ico);
  EXPECT_GT(signed_volume(ico), 0.0);

  const TriMesh geo = make_geodesic_sphere({1, 2, 3}, 2.0, 10);
  expect_closed_sphere_like(geo);
  EXPECT_EQ(geo.triangle_count(), 2000u);
  EXPECT_NEAR(signed_volume(geo), 4.0 / 3.0 * pi * 8.0, 0.02 * 4.0 / 3.0 * pi * 8.0);

  const TriMesh uv = make_uv_sphere({}, 1.0, 32, 16);
  expect_closed_sphere_like(uv);
  EXPECT_GT(signed_volume(uv), 0.0);

  const TriMesh box = make_box({0, 0, 0}, {1, 2, 3}, 4);
  expect_closed_sphere_like(box);
  EXPECT_EQ(box.triangle_count(), 12u * 16u);
  EXPECT_NEAR(signed_volume(box), 6.0, 1e-12);
  EXPECT_NEAR(surface_area(box), 22.0, 1e-12);

  const TriMesh cyl = make_cylinder({}, 1.0, 2.0, 64, 4, 3);
  expect_closed_sphere_like(cyl);
  EXPECT_NEAR(signed_volume(cyl), 64.0 / 2.0 * std::sin(2.0 * pi / 64.0) * 2.0, 1e-9);

  const TriMesh torus = make_torus({}, 2.0, 0.5, 48, 24);
  EXPECT_TRUE(validate(torus).empty());
  EXPECT_EQ(euler_characteristic(torus), 0);
  EXPECT_NEAR(signed_volume(torus), 2.0 * pi * pi * 2.0 * 0.25, 0.02 * 2.0 * pi * pi * 2.0 * 0.25);
}

TEST(Primitives, SheetWithHoles) {
  const TriMesh sheet = make_sheet(0, 10, 0, 10, 0, 20, 20, {{3, 3, 1}, {7, 7, 1}});
  EXPECT_TRUE(validate(sheet).empty());
  EXPECT_EQ(boundary_loops(sheet).size(), 3u);
  for (int t : sheet.live_triangles()) EXPECT_GT(sheet.triangle_normal(t).z, 0.99);
}

TEST(Primitives, EdgeStats) {
  const TriMesh box = make_box({0, 0, 0}, {1, 1, 1}, 1);
  std::vector<EdgeKey> axis;
  for (const EdgeKey& e : box.edges()) {
    if (std::abs(box.edge_length(e) - 1.0) < 1e-12) axis.push_back(e);
  }
  const EdgeStats s = edge_length_stats(box, axis);
  EXPECT_EQ(s.count, 12u);
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_NEAR(s.stddev, 0.0, 1e-12);
}
