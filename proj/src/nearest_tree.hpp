#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ambool/constraints.hpp"
#include "ambool/geometry.hpp"

namespace ambool {

// Static kd-tree over points. Ties resolve to the lowest index, matching a
// linear scan with strict comparison.
class PointTree {
 public:
  explicit PointTree(std::vector<Vec3> points) : points_(std::move(points)), order_(points_.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, int(order_.size()), 0);
  }

  int nearest(const Vec3& q) const {
    Best best;
    if (!order_.empty()) search(0, int(order_.size()), 0, q, best);
    return best.index;
  }

 private:
  struct Best {
    double d = std::numeric_limits<double>::max();
    int index = -1;
    void offer(double dd, int i) {
      if (dd < d || (dd == d && i < index)) {
        d = dd;
        index = i;
      }
    }
  };

  void build(int lo, int hi, int axis) {
    if (hi - lo <= 8) return;
    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(int lo, int hi, int axis, const Vec3& q, Best& best) const {
    if (hi - lo <= 8) {
      for (int k = lo; k < hi; ++k) best.offer(distance_squared(points_[order_[k]], q), order_[k]);
      return;
    }
    const int mid = (lo + hi) / 2;
    const int m = order_[mid];
    best.offer(distance_squared(points_[m], q), m);
    const double delta = q[axis] - points_[m][axis];
    const int next = (axis + 1) % 3;
    if (delta < 0.0) {
      search(lo, mid, next, q, best);
      if (delta * delta <= best.d) search(mid + 1, hi, next, q, best);
    } else {
      search(mid + 1, hi, next, q, best);
      if (delta * delta <= best.d) search(lo, mid, next, q, best);
    }
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
};

// Bounding-volume hierarchy over segments for closest-point queries. Ties
// resolve to the lowest segment index.
class SegmentTree {
 public:
  explicit SegmentTree(std::span<const IntersectionSegment> segments) : segments_(segments) {
    order_.resize(segments.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, int(order_.size()));
  }

  bool empty() const { return segments_.empty(); }

  Vec3 closest(const Vec3& q) const {
    Best best;
    if (!nodes_.empty()) search(0, q, best);
    return best.point;
  }

 private:
  struct Node {
    Aabb box;
    int lo = 0, hi = 0;
    int left = -1, right = -1;
  };
  struct Best {
    double d = std::numeric_limits<double>::max();
    int index = -1;
    Vec3 point;
  };

  int build(int lo, int hi) {
    const int id = int(nodes_.size());
    nodes_.push_back({});
    Aabb box;
    for (int k = lo; k < hi; ++k) {
      box.extend(segments_[order_[k]].p0);
      box.extend(segments_[order_[k]].p1);
    }
    nodes_[id].box = box;
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    if (hi - lo > 8) {
      const Vec3 ext = box.hi - box.lo;
      const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
      const int mid = (lo + hi) / 2;
      std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi, [&](int a, int b) {
        return segments_[a].p0[axis] + segments_[a].p1[axis] < segments_[b].p0[axis] + segments_[b].p1[axis];
      });
      const int left = build(lo, mid);
      const int right = build(mid, hi);
      nodes_[id].left = left;
      nodes_[id].right = right;
    }
    return id;
  }

  void search(int id, const Vec3& q, Best& best) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (int k = n.lo; k < n.hi; ++k) {
        const int s = order_[k];
        const Vec3 p = closest_point_on_segment(segments_[s].p0, segments_[s].p1, q);
        const double d = distance_squared(p, q);
        if (d < best.d || (d == best.d && s < best.index)) {
          best.d = d;
          best.index = s;
          best.point = p;
        }
      }
      return;
    }
    const double dl = nodes_[n.left].box.distance_squared_to(q);
    const double dr = nodes_[n.right].box.distance_squared_to(q);
    const int first = dl <= dr ? n.left : n.right;
    const int second = dl <= dr ? n.right : n.left;
    if (std::min(dl, dr) <= best.d) search(first, q, best);
    if (std::max(dl, dr) <= best.d) search(second, q, best);
  }

  std::span<const IntersectionSegment> segments_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace ambool
