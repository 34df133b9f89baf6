#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "ambool/boolean.hpp"
#include "ambool/tri_mesh.hpp"

namespace oracle {

using ambool::Vec3;

// Crossings of vertical lines with a closed mesh, bucketed on an xy grid.
class ColumnCaster {
 public:
  ColumnCaster(const ambool::TriMesh& mesh, double x0, double y0, double cell, int n)
      : x0_(x0), y0_(y0), cell_(cell), n_(n), bins_(size_t(n) * n) {
    for (int t : mesh.live_triangles()) {
      const auto p = mesh.triangle_points(t);
      tris_.push_back(p);
      const int id = int(tris_.size()) - 1;
      double lx = p[0].x, hx = p[0].x, ly = p[0].y, hy = p[0].y;
      for (const Vec3& q : p) {
        lx = std::min(lx, q.x), hx = std::max(hx, q.x);
        ly = std::min(ly, q.y), hy = std::max(hy, q.y);
      }
      const int i0 = clamp_cell(std::floor((lx - x0_) / cell_)), i1 = clamp_cell(std::floor((hx - x0_) / cell_));
      const int j0 = clamp_cell(std::floor((ly - y0_) / cell_)), j1 = clamp_cell(std::floor((hy - y0_) / cell_));
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) bins_[size_t(i) * n_ + j].push_back(id);
    }
  }

  // Sorted z of every crossing of the line through (x, y).
  std::vector<double> crossings(double x, double y) const {
    std::vector<double> zs;
    const int i = clamp_cell(std::floor((x - x0_) / cell_)), j = clamp_cell(std::floor((y - y0_) / cell_));
    for (int id : bins_[size_t(i) * n_ + j]) {
      const auto& p = tris_[id];
      const double d = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
      if (d == 0.0) continue;
      const double u = ((x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (y - p[0].y)) / d;
      const double v = ((p[1].x - p[0].x) * (y - p[0].y) - (x - p[0].x) * (p[1].y - p[0].y)) / d;
      if (u < 0.0 || v < 0.0 || u + v > 1.0) continue;
      zs.push_back(p[0].z + u * (p[1].z - p[0].z) + v * (p[2].z - p[0].z));
    }
    std::sort(zs.begin(), zs.end());
    return zs;
  }

 private:
  int clamp_cell(double c) const { return std::clamp(int(c), 0, n_ - 1); }

  double x0_, y0_, cell_;
  int n_;
  std::vector<std::array<Vec3, 3>> tris_;
  std::vector<std::vector<int>> bins_;
};

inline bool inside(const std::vector<double>& zs, double z) {
  return (std::upper_bound(zs.begin(), zs.end(), z) - zs.begin()) % 2 == 1;
}

// Volume of `op` applied to two closed meshes on a res^3 voxel grid over
// their joint bounding box. Column positions are jittered inside each cell.
inline double csg_volume(const ambool::TriMesh& a, const ambool::TriMesh& b, ambool::BooleanOp op, int res,
                         uint64_t seed) {
  Vec3 lo = a.position(a.live_vertices().front()), hi = lo;
  for (const ambool::TriMesh* m : {&a, &b})
    for (int v : m->live_vertices()) {
      const Vec3 p = m->position(v);
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  const double side = std::max(hi.x - lo.x, hi.y - lo.y) * (1.0 + 1e-9);
  const double h = side / res;
  const double hz = (hi.z - lo.z) / res;
  const int bins = std::max(1, res / 4);
  const ColumnCaster ca(a, lo.x, lo.y, side / bins, bins), cb(b, lo.x, lo.y, side / bins, bins);
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> jitter(0.05, 0.95);
  size_t count = 0;
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      const double x = lo.x + (i + jitter(rng)) * h, y = lo.y + (j + jitter(rng)) * h;
      const auto za = ca.crossings(x, y), zb = cb.crossings(x, y);
      if (za.empty() && zb.empty()) continue;
      for (int k = 0; k < res; ++k) {
        const double z = lo.z + (k + 0.5) * hz;
        const bool ia = inside(za, z), ib = inside(zb, z);
        const bool in = op == ambool::BooleanOp::kUnion          ? (ia || ib)
                        : op == ambool::BooleanOp::kIntersection ? (ia && ib)
                                                                 : (ia && !ib);
        count += in;
      }
    }
  }
  return double(count) * h * h * hz;
}

}  // namespace oracle
