#pragma once

#include <vector>

#include "ambool/tri_mesh.hpp"

namespace ambool {

// Closed primitives are outward oriented (counter-clockwise seen from outside).

TriMesh make_tetrahedron(double edge = 1.0);
TriMesh make_icosahedron(double radius = 1.0);
/// Icosahedron faces subdivided `n` times along each edge and pushed to the
/// sphere: 20 n^2 triangles.
TriMesh make_geodesic_sphere(const Vec3& center, double radius, int n);
TriMesh make_uv_sphere(const Vec3& center, double radius, int slices, int stacks);
/// Axis-aligned box with an n x n grid on every face: 12 n^2 triangles.
TriMesh make_box(const Vec3& lo, const Vec3& hi, int n);
/// Closed cylinder along +z from `base`, `segments` around, `rings` along the
/// side and polar rings on each cap.
TriMesh make_cylinder(const Vec3& base, double radius, double height, int segments, int rings, int cap_rings);
/// Side wall only (no caps): two boundary loops of `segments` vertices.
TriMesh make_open_cylinder(const Vec3& base, double radius, double height, int segments, int rings);
TriMesh make_torus(const Vec3& center, double major, double minor, int major_segments, int minor_segments);

struct Hole {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};
/// Open sheet in the z = `z` plane over [x0,x1] x [y0,y1] with nx x ny cells
/// split into triangles; cells whose centers fall in a hole are dropped.
/// Normal points to +z.
TriMesh make_sheet(double x0, double x1, double y0, double y1, double z, int nx, int ny,
                   const std::vector<Hole>& holes = {});

/// Transforms applied in place.
void translate(TriMesh& mesh, const Vec3& offset);
void rotate(TriMesh& mesh, const Vec3& axis, double angle, const Vec3& pivot = {});
void scale(TriMesh& mesh, const Vec3& factors, const Vec3& pivot = {});

/// Signed enclosed volume (divergence theorem); positive for outward closed meshes.
double signed_volume(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);

struct EdgeStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  size_t count = 0;
};
EdgeStats edge_length_stats(const TriMesh& mesh, const std::vector<EdgeKey>& edges);

}  // namespace ambool
