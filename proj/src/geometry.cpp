#include "ambool/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ambool/error.hpp"

namespace ambool {

namespace {

double orient(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool lex_less(const TrianglePoints& a, const TrianglePoints& b) {
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (a[i][k] != b[i][k]) return a[i][k] < b[i][k];
    }
  }
  return false;
}

// Drops the axis where the plane normal is largest.
struct Projector2 {
  int u = 0;
  int v = 1;
  explicit Projector2(const Vec3& n) {
    const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    if (ax >= ay && ax >= az) {
      u = 1;
      v = 2;
    } else if (ay >= az) {
      u = 0;
      v = 2;
    }
  }
  std::pair<double, double> operator()(const Vec3& p) const { return {p[u], p[v]}; }
};

using P2 = std::pair<double, double>;

double orient2(const P2& a, const P2& b, const P2& c) {
  return (b.first - a.first) * (c.second - a.second) - (b.second - a.second) * (c.first - a.first);
}

bool on_segment2(const P2& a, const P2& b, const P2& p) {
  return std::min(a.first, b.first) <= p.first && p.first <= std::max(a.first, b.first) &&
         std::min(a.second, b.second) <= p.second && p.second <= std::max(a.second, b.second);
}

bool segments_intersect2(const P2& p1, const P2& p2, const P2& q1, const P2& q2) {
  const double d1 = orient2(q1, q2, p1);
  const double d2 = orient2(q1, q2, p2);
  const double d3 = orient2(p1, p2, q1);
  const double d4 = orient2(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment2(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment2(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment2(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment2(p1, p2, q2)) return true;
  return false;
}

bool point_in_triangle2(const P2& p, const P2& a, const P2& b, const P2& c) {
  const double d1 = orient2(a, b, p);
  const double d2 = orient2(b, c, p);
  const double d3 = orient2(c, a, p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

bool segment_triangle_coplanar(const Vec3& p, const Vec3& q, const TrianglePoints& t) {
  const Projector2 proj(triangle_cross(t[0], t[1], t[2]));
  const P2 a = proj(t[0]), b = proj(t[1]), c = proj(t[2]);
  const P2 pp = proj(p), qq = proj(q);
  if (point_in_triangle2(pp, a, b, c) || point_in_triangle2(qq, a, b, c)) return true;
  return segments_intersect2(pp, qq, a, b) || segments_intersect2(pp, qq, b, c) || segments_intersect2(pp, qq, c, a);
}

bool segment_triangle(const Vec3& p, const Vec3& q, const TrianglePoints& t) {
  const int sp = sign(orient(t[0], t[1], t[2], p));
  const int sq = sign(orient(t[0], t[1], t[2], q));
  if (sp == sq && sp != 0) return false;
  if (sp == 0 && sq == 0) return segment_triangle_coplanar(p, q, t);
  // The segment straddles (or touches) the plane; its supporting line must
  // pass through the triangle.
  const int s0 = sign(orient(p, q, t[0], t[1]));
  const int s1 = sign(orient(p, q, t[1], t[2]));
  const int s2 = sign(orient(p, q, t[2], t[0]));
  const bool neg = s0 < 0 || s1 < 0 || s2 < 0;
  const bool pos = s0 > 0 || s1 > 0 || s2 > 0;
  if (neg && pos) return false;
  if (!neg && !pos) {
    // Line lies in the triangle plane's pencil degenerately; fall back to 2D.
    return segment_triangle_coplanar(p, q, t);
  }
  return true;
}

bool overlap_exact(const TrianglePoints& a, const TrianglePoints& b) {
  // Cheap plane rejection.
  const int sb0 = sign(orient(a[0], a[1], a[2], b[0]));
  const int sb1 = sign(orient(a[0], a[1], a[2], b[1]));
  const int sb2 = sign(orient(a[0], a[1], a[2], b[2]));
  if (sb0 == sb1 && sb1 == sb2 && sb0 != 0) return false;
  const int sa0 = sign(orient(b[0], b[1], b[2], a[0]));
  const int sa1 = sign(orient(b[0], b[1], b[2], a[1]));
  const int sa2 = sign(orient(b[0], b[1], b[2], a[2]));
  if (sa0 == sa1 && sa1 == sa2 && sa0 != 0) return false;

  if (sb0 == 0 && sb1 == 0 && sb2 == 0) {
    const Projector2 proj(triangle_cross(a[0], a[1], a[2]));
    const P2 a0 = proj(a[0]), a1 = proj(a[1]), a2 = proj(a[2]);
    const P2 b0 = proj(b[0]), b1 = proj(b[1]), b2 = proj(b[2]);
    const P2 ea[3][2] = {{a0, a1}, {a1, a2}, {a2, a0}};
    const P2 eb[3][2] = {{b0, b1}, {b1, b2}, {b2, b0}};
    for (auto& x : ea) {
      for (auto& y : eb) {
        if (segments_intersect2(x[0], x[1], y[0], y[1])) return true;
      }
    }
    return point_in_triangle2(a0, b0, b1, b2) || point_in_triangle2(b0, a0, a1, a2);
  }
  for (int i = 0; i < 3; ++i) {
    if (segment_triangle(a[i], a[(i + 1) % 3], b)) return true;
    if (segment_triangle(b[i], b[(i + 1) % 3], a)) return true;
  }
  return false;
}

// Points where the triangle meets the plane (n, d): crossings of its edges
// plus vertices lying exactly on the plane.
int plane_section(const TrianglePoints& t, const std::array<double, 3>& dist, std::array<Vec3, 3>& out) {
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    if (dist[i] == 0.0) out[count++] = t[i];
  }
  for (int i = 0; i < 3 && count < 3; ++i) {
    const int j = (i + 1) % 3;
    if ((dist[i] > 0 && dist[j] < 0) || (dist[i] < 0 && dist[j] > 0)) {
      const double s = dist[i] / (dist[i] - dist[j]);
      out[count++] = t[i] + (t[j] - t[i]) * s;
    }
  }
  return count;
}

}  // namespace

TrianglePoint closest_point_on_triangle(const TrianglePoints& t, const Vec3& p) {
  const Vec3& a = t[0];
  const Vec3& b = t[1];
  const Vec3& c = t[2];
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, {1, 0, 0}};
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, {0, 1, 0}};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {a + ab * v, {1 - v, v, 0}};
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, {0, 0, 1}};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {a + ac * w, {1 - w, 0, w}};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + (c - b) * w, {0, 1 - w, w}};
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {a + ab * v + ac * w, {1 - v - w, v, w}};
}

SegmentPair closest_points_segments(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = dot(d1, d1);
  const double e = dot(d2, d2);
  const double f = dot(d2, r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0) {
    s = t = 0.0;
  } else if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  SegmentPair out;
  out.on_first = p0 + d1 * s;
  out.on_second = q0 + d2 * t;
  out.distance_squared = distance_squared(out.on_first, out.on_second);
  return out;
}

bool is_degenerate(const TrianglePoints& t) {
  const Vec3 n = triangle_cross(t[0], t[1], t[2]);
  const double scale = std::max({length_squared(t[1] - t[0]), length_squared(t[2] - t[1]), length_squared(t[0] - t[2])});
  return !(length_squared(n) > 1e-28 * scale * scale) || scale == 0.0;
}

double triangle_distance(const TrianglePoints& a, const TrianglePoints& b) {
  if (overlap_exact(a, b)) return 0.0;
  double best = std::numeric_limits<double>::max();
  for (int i = 0; i < 3; ++i) {
    best = std::min(best, distance_squared(a[i], closest_point_on_triangle(b, a[i]).point));
    best = std::min(best, distance_squared(b[i], closest_point_on_triangle(a, b[i]).point));
    for (int j = 0; j < 3; ++j) {
      best = std::min(best, closest_points_segments(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]).distance_squared);
    }
  }
  return std::sqrt(best);
}

bool tri_tri_intersect(const TrianglePoints& a, const TrianglePoints& b, double tolerance) {
  if (is_degenerate(a) || is_degenerate(b)) throw Error(ErrorCode::kDegenerateInput, "degenerate triangle in overlap test");
  // Canonical argument order makes the predicate exactly symmetric.
  const bool swap = lex_less(b, a);
  const TrianglePoints& first = swap ? b : a;
  const TrianglePoints& second = swap ? a : b;
  if (tolerance <= 0.0) return overlap_exact(first, second);
  Aabb ba, bb;
  for (const Vec3& p : first) ba.extend(p);
  for (const Vec3& p : second) bb.extend(p);
  if (!ba.expanded(tolerance).overlaps(bb)) return false;
  return triangle_distance(first, second) <= tolerance;
}

std::optional<IntersectionSegment> tri_tri_segment(const TrianglePoints& a, const TrianglePoints& b) {
  const Vec3 na = triangle_cross(a[0], a[1], a[2]);
  const Vec3 nb = triangle_cross(b[0], b[1], b[2]);
  std::array<double, 3> da{}, db{};
  for (int i = 0; i < 3; ++i) {
    da[i] = dot(nb, a[i] - b[0]);
    db[i] = dot(na, b[i] - a[0]);
  }
  auto same_side = [](const std::array<double, 3>& d) {
    return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
  };
  if (same_side(da) || same_side(db)) return std::nullopt;
  const Vec3 dir = cross(na, nb);
  if (length_squared(dir) <= 1e-24 * length_squared(na) * length_squared(nb)) return std::nullopt;
  if (da[0] == 0 && da[1] == 0 && da[2] == 0) return std::nullopt;

  std::array<Vec3, 3> pa{}, pb{};
  const int ca = plane_section(a, da, pa);
  const int cb = plane_section(b, db, pb);
  if (ca == 0 || cb == 0) return std::nullopt;
  auto interval = [&](const std::array<Vec3, 3>& pts, int count) {
    int lo = 0, hi = 0;
    for (int i = 1; i < count; ++i) {
      if (dot(pts[i], dir) < dot(pts[lo], dir)) lo = i;
      if (dot(pts[i], dir) > dot(pts[hi], dir)) hi = i;
    }
    return std::pair<Vec3, Vec3>{pts[lo], pts[hi]};
  };
  const auto [a_lo, a_hi] = interval(pa, ca);
  const auto [b_lo, b_hi] = interval(pb, cb);
  const Vec3& lo = dot(a_lo, dir) >= dot(b_lo, dir) ? a_lo : b_lo;
  const Vec3& hi = dot(a_hi, dir) <= dot(b_hi, dir) ? a_hi : b_hi;
  if (dot(lo, dir) > dot(hi, dir)) return std::nullopt;
  return IntersectionSegment{lo, hi, -1, -1};
}

std::optional<RayTriangleHit> ray_triangle(const Ray& ray, const TrianglePoints& t, double edge_eps) {
  const Vec3 e1 = t[1] - t[0];
  const Vec3 e2 = t[2] - t[0];
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  const double scale = length(e1) * length(e2);
  if (std::abs(det) <= 1e-14 * scale) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - t[0];
  const double u = dot(s, p) * inv;
  if (u < -edge_eps || u > 1.0 + edge_eps) return std::nullopt;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv;
  if (v < -edge_eps || u + v > 1.0 + edge_eps) return std::nullopt;
  const double dist = dot(e2, q) * inv;
  if (dist <= 0.0) return std::nullopt;
  RayTriangleHit hit;
  hit.t = dist;
  hit.barycentric = {1.0 - u - v, u, v};
  hit.unreliable = u <= edge_eps || v <= edge_eps || 1.0 - u - v <= edge_eps;
  return hit;
}

bool ray_hits_box(const Ray& ray, const Aabb& box) {
  double tmin = 0.0;
  double tmax = std::numeric_limits<double>::max();
  for (int i = 0; i < 3; ++i) {
    const double d = ray.direction[i];
    const double o = ray.origin[i];
    if (std::abs(d) < 1e-300) {
      if (o < box.lo[i] || o > box.hi[i]) return false;
      continue;
    }
    double t0 = (box.lo[i] - o) / d;
    double t1 = (box.hi[i] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  return true;
}

}  // namespace ambool
