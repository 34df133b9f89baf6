#include "ambool/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace ambool {

namespace {

// Welds exactly equal positions while building a triangle list.
class Welder {
 public:
  int vertex(const Vec3& p) {
    auto [it, inserted] = ids_.emplace(std::make_tuple(p.x, p.y, p.z), int(points_.size()));
    if (inserted) points_.push_back(p);
    return it->second;
  }
  void triangle(int a, int b, int c) {
    if (a != b && b != c && a != c) tris_.push_back({a, b, c});
  }
  TriMesh finish() { return TriMesh(std::move(points_), std::move(tris_)); }

 private:
  std::map<std::tuple<double, double, double>, int> ids_;
  std::vector<Vec3> points_;
  std::vector<Triangle> tris_;
};

}  // namespace

TriMesh make_tetrahedron(double edge) {
  const double s = edge / (2.0 * std::sqrt(2.0));
  std::vector<Vec3> p = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  std::vector<Triangle> t = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return TriMesh(std::move(p), std::move(t));
}

namespace {

std::vector<Vec3> icosahedron_points() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> p = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                         {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& v : p) v = normalized(v);
  return p;
}

const std::vector<Triangle>& icosahedron_faces() {
  static const std::vector<Triangle> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return faces;
}

}  // namespace

TriMesh make_icosahedron(double radius) {
  std::vector<Vec3> p = icosahedron_points();
  for (Vec3& v : p) v *= radius;
  return TriMesh(std::move(p), icosahedron_faces());
}

TriMesh make_geodesic_sphere(const Vec3& center, double radius, int n) {
  n = std::max(n, 1);
  const std::vector<Vec3> base = icosahedron_points();
  std::vector<Vec3> points;
  std::vector<Triangle> tris;
  std::map<int, int> corner_ids;
  std::map<std::tuple<int, int, int>, int> edge_ids;  // (lo, hi, steps from lo)
  auto emit = [&](const Vec3& p) {
    points.push_back(center + normalized(p) * radius);
    return int(points.size()) - 1;
  };
  for (const Triangle& f : icosahedron_faces()) {
    // grid[i][j]: point i steps from f[0] towards f[1] and j towards f[2].
    std::vector<std::vector<int>> grid(n + 1, std::vector<int>(n + 1, -1));
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; i + j <= n; ++j) {
        const int k = n - i - j;
        const int w[3] = {k, i, j};
        int zeros = 0;
        for (int c = 0; c < 3; ++c) zeros += w[c] == 0;
        int id = -1;
        if (zeros == 2) {
          const int c = w[0] ? 0 : (w[1] ? 1 : 2);
          auto it = corner_ids.find(f[c]);
          if (it == corner_ids.end()) it = corner_ids.emplace(f[c], emit(base[f[c]])).first;
          id = it->second;
        } else if (zeros == 1) {
          int c0 = -1, c1 = -1;
          for (int c = 0; c < 3; ++c) {
            if (w[c] == 0) continue;
            (c0 < 0 ? c0 : c1) = c;
          }
          int va = f[c0], vb = f[c1];
          int steps = w[c1];  // distance from va measured in units toward vb
          if (va > vb) {
            std::swap(va, vb);
            steps = n - steps;
          }
          const auto key = std::make_tuple(va, vb, steps);
          auto it = edge_ids.find(key);
          if (it == edge_ids.end()) {
            const Vec3 p = base[va] + (base[vb] - base[va]) * (double(steps) / n);
            it = edge_ids.emplace(key, emit(p)).first;
          }
          id = it->second;
        } else {
          const Vec3 p = (base[f[0]] * k + base[f[1]] * i + base[f[2]] * j) / double(n);
          id = emit(p);
        }
        grid[i][j] = id;
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        tris.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
        if (i + j + 2 <= n) tris.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
    }
  }
  return TriMesh(std::move(points), std::move(tris));
}

TriMesh make_uv_sphere(const Vec3& center, double radius, int slices, int stacks) {
  std::vector<Vec3> p;
  std::vector<Triangle> t;
  p.push_back(center + Vec3{0, 0, radius});
  for (int i = 1; i < stacks; ++i) {
    const double theta = kPi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * kPi * j / slices;
      p.push_back(center + Vec3{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)} * radius);
    }
  }
  p.push_back(center - Vec3{0, 0, radius});
  const int south = int(p.size()) - 1;
  auto ring = [&](int i, int j) { return 1 + (i - 1) * slices + ((j % slices) + slices) % slices; };
  for (int j = 0; j < slices; ++j) t.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      t.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      t.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  for (int j = 0; j < slices; ++j) t.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  return TriMesh(std::move(p), std::move(t));
}

TriMesh make_box(const Vec3& lo, const Vec3& hi, int n) {
  n = std::max(n, 1);
  Welder w;
  auto coord = [&](int axis, int i) { return i == n ? hi[axis] : lo[axis] + (hi[axis] - lo[axis]) * (double(i) / n); };
  // For each axis and side, a grid over the two remaining axes.
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      std::vector<std::vector<int>> ids(n + 1, std::vector<int>(n + 1));
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
          Vec3 p;
          p[axis] = side ? hi[axis] : lo[axis];
          p[u] = coord(u, i);
          p[v] = coord(v, j);
          ids[i][j] = w.vertex(p);
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int a = ids[i][j], b = ids[i + 1][j], c = ids[i + 1][j + 1], d = ids[i][j + 1];
          // (u, v, axis) is right-handed, so u x v points along +axis.
          if (side) {
            w.triangle(a, b, c);
            w.triangle(a, c, d);
          } else {
            w.triangle(a, c, b);
            w.triangle(a, d, c);
          }
        }
      }
    }
  }
  return w.finish();
}

namespace {

void cylinder_side(std::vector<Vec3>& p, std::vector<Triangle>& t, const Vec3& base, double radius, double height,
                   int segments, int rings, std::vector<int>& bottom, std::vector<int>& top) {
  std::vector<std::vector<int>> ids(rings + 1, std::vector<int>(segments));
  for (int i = 0; i <= rings; ++i) {
    const double z = height * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * kPi * j / segments;
      p.push_back(base + Vec3{radius * std::cos(a), radius * std::sin(a), z});
      ids[i][j] = int(p.size()) - 1;
    }
  }
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      const int jn = (j + 1) % segments;
      t.push_back({ids[i][j], ids[i][jn], ids[i + 1][jn]});
      t.push_back({ids[i][j], ids[i + 1][jn], ids[i + 1][j]});
    }
  }
  bottom = ids[0];
  top = ids[rings];
}

void cylinder_cap(std::vector<Vec3>& p, std::vector<Triangle>& t, const Vec3& center, double radius, double z,
                  int segments, int cap_rings, const std::vector<int>& rim, bool up) {
  std::vector<std::vector<int>> ids(cap_rings + 1);
  ids[cap_rings] = rim;
  for (int r = 1; r < cap_rings; ++r) {
    const double rr = radius * r / cap_rings;
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * kPi * j / segments;
      p.push_back(center + Vec3{rr * std::cos(a), rr * std::sin(a), z});
      ids[r].push_back(int(p.size()) - 1);
    }
  }
  p.push_back(center + Vec3{0, 0, z});
  const int c = int(p.size()) - 1;
  auto tri = [&](int a, int b, int d) {
    if (up) {
      t.push_back({a, b, d});
    } else {
      t.push_back({a, d, b});
    }
  };
  for (int j = 0; j < segments; ++j) {
    const int jn = (j + 1) % segments;
    tri(c, ids[1][j], ids[1][jn]);
  }
  for (int r = 1; r < cap_rings; ++r) {
    for (int j = 0; j < segments; ++j) {
      const int jn = (j + 1) % segments;
      tri(ids[r][j], ids[r + 1][j], ids[r + 1][jn]);
      tri(ids[r][j], ids[r + 1][jn], ids[r][jn]);
    }
  }
}

}  // namespace

TriMesh make_cylinder(const Vec3& base, double radius, double height, int segments, int rings, int cap_rings) {
  std::vector<Vec3> p;
  std::vector<Triangle> t;
  std::vector<int> bottom, top;
  cylinder_side(p, t, base, radius, height, segments, rings, bottom, top);
  cap_rings = std::max(cap_rings, 1);
  cylinder_cap(p, t, base, radius, height, segments, cap_rings, top, true);
  cylinder_cap(p, t, base, radius, 0.0, segments, cap_rings, bottom, false);
  return TriMesh(std::move(p), std::move(t));
}

TriMesh make_open_cylinder(const Vec3& base, double radius, double height, int segments, int rings) {
  std::vector<Vec3> p;
  std::vector<Triangle> t;
  std::vector<int> bottom, top;
  cylinder_side(p, t, base, radius, height, segments, rings, bottom, top);
  return TriMesh(std::move(p), std::move(t));
}

TriMesh make_torus(const Vec3& center, double major, double minor, int major_segments, int minor_segments) {
  std::vector<Vec3> p;
  std::vector<Triangle> t;
  for (int i = 0; i < major_segments; ++i) {
    const double u = 2.0 * kPi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double v = 2.0 * kPi * j / minor_segments;
      const double r = major + minor * std::cos(v);
      p.push_back(center + Vec3{r * std::cos(u), r * std::sin(u), minor * std::sin(v)});
    }
  }
  auto id = [&](int i, int j) { return (i % major_segments) * minor_segments + (j % minor_segments); };
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriMesh(std::move(p), std::move(t));
}

TriMesh make_sheet(double x0, double x1, double y0, double y1, double z, int nx, int ny,
                   const std::vector<Hole>& holes) {
  Welder w;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double cx = x0 + (x1 - x0) * (i + 0.5) / nx;
      const double cy = y0 + (y1 - y0) * (j + 0.5) / ny;
      bool skip = false;
      for (const Hole& h : holes) {
        if ((cx - h.x) * (cx - h.x) + (cy - h.y) * (cy - h.y) < h.radius * h.radius) skip = true;
      }
      if (skip) continue;
      auto at = [&](int a, int b) {
        return w.vertex({a == nx ? x1 : x0 + (x1 - x0) * a / nx, b == ny ? y1 : y0 + (y1 - y0) * b / ny, z});
      };
      const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      if ((i + j) % 2 == 0) {
        w.triangle(a, b, c);
        w.triangle(a, c, d);
      } else {
        w.triangle(a, b, d);
        w.triangle(b, c, d);
      }
    }
  }
  return w.finish();
}

void translate(TriMesh& mesh, const Vec3& offset) {
  for (int v : mesh.live_vertices()) mesh.set_position(v, mesh.position(v) + offset);
}

void rotate(TriMesh& mesh, const Vec3& axis, double angle, const Vec3& pivot) {
  const Vec3 k = normalized(axis);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int v : mesh.live_vertices()) {
    const Vec3 p = mesh.position(v) - pivot;
    const Vec3 r = p * c + cross(k, p) * s + k * (dot(k, p) * (1.0 - c));
    mesh.set_position(v, r + pivot);
  }
}

void scale(TriMesh& mesh, const Vec3& factors, const Vec3& pivot) {
  for (int v : mesh.live_vertices()) {
    const Vec3 p = mesh.position(v) - pivot;
    mesh.set_position(v, pivot + Vec3{p.x * factors.x, p.y * factors.y, p.z * factors.z});
  }
}

double signed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (int t : mesh.live_triangles()) {
    const auto p = mesh.triangle_points(t);
    vol += dot(p[0], cross(p[1], p[2]));
  }
  return vol / 6.0;
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (int t : mesh.live_triangles()) area += mesh.triangle_area(t);
  return area;
}

EdgeStats edge_length_stats(const TriMesh& mesh, const std::vector<EdgeKey>& edges) {
  EdgeStats s;
  s.count = edges.size();
  if (edges.empty()) return s;
  std::vector<double> lengths;
  lengths.reserve(edges.size());
  for (const EdgeKey& e : edges) lengths.push_back(mesh.edge_length(e));
  double sum = 0.0;
  for (double l : lengths) sum += l;
  s.mean = sum / double(lengths.size());
  double var = 0.0;
  for (double l : lengths) var += (l - s.mean) * (l - s.mean);
  s.stddev = std::sqrt(var / double(lengths.size()));
  std::sort(lengths.begin(), lengths.end());
  s.min = lengths.front();
  s.max = lengths.back();
  s.median = lengths[lengths.size() / 2];
  return s;
}

}  // namespace ambool
