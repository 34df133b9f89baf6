#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ambool/boolean.hpp"
#include "ambool/mesh_io.hpp"
#include "ambool/primitives.hpp"
#include "ambool/report.hpp"
#include "ambool/spatial_index.hpp"
#include "cli.hpp"
#include "fixtures.hpp"
#include "voxel_oracle.hpp"

using namespace ambool;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string first_failure(const BooleanResult& r) {
  return r.report.failures.empty() ? std::string("no mesh") : r.report.failures.back();
}

// 1 -------------------------------------------------------------------------

Outcome seam_regularity() {
  Outcome out;
  TriMesh box = make_box({-0.7, -0.7, -0.7}, {0.7, 0.7, 0.7}, 24);
  rotate(box, normalized(Vec3{1, 2, 3}), 0.4);
  translate(box, {0.8, 0.4, 0.3});
  TriMesh bumpy = make_geodesic_sphere({0, 0, 0}, 1.0, 64);
  for (int v : bumpy.live_vertices()) {
    const Vec3 p = bumpy.position(v);
    bumpy.set_position(v, p * (1.0 + 0.06 * std::sin(5 * p.x) * std::sin(4 * p.y + 1) * std::sin(3 * p.z + 2)));
  }
  const struct {
    const char* name;
    TriMesh a, b;
  } cases[] = {
      {"sphere-sphere", make_geodesic_sphere({0, 0, 0}, 1.0, 32), make_geodesic_sphere({0.9, 0.3, 0.2}, 0.8, 32)},
      {"sphere-box", make_geodesic_sphere({0, 0, 0}, 1.0, 32), box},
      {"bumpy-sphere", bumpy, make_geodesic_sphere({0.9, 0.4, 0.1}, 0.7, 40)},
  };
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const BooleanResult r = boolean_op(c.a, c.b, BooleanParams{});
    const double sec = seconds_since(t0);
    if (!r.mesh || !r.report.seam) {
      out.require(false, std::string(c.name) + ": " + first_failure(r));
      continue;
    }
    const double ratio = r.report.seam->stddev / r.report.seam_target_edge_length;
    out.require(ratio <= 0.2 && sec <= 60.0,
                fmt("%s (%zu tris) sd/target %.3f in %.1fs", c.name, c.a.triangle_count(), ratio, sec));
  }
  return out;
}

// 2 -------------------------------------------------------------------------

Outcome volume_oracle() {
  Outcome out;
  std::mt19937_64 rng{2024};
  double worst = 0.0;
  size_t runs = 0, min_tris = SIZE_MAX, max_tris = 0;
  for (int c = 0; c < 20; ++c) {
    const fixtures::ConvexPair pair = fixtures::random_convex_pair(rng);
    const TriMesh& a = pair.a;
    const TriMesh& b = pair.b;
    const std::string& ka = pair.kind_a;
    const std::string& kb = pair.kind_b;
    for (const TriMesh* m : {&a, &b}) {
      min_tris = std::min(min_tris, m->triangle_count());
      max_tris = std::max(max_tris, m->triangle_count());
    }
    if (!validate(a).empty() || !validate(b).empty()) {
      out.require(false, fmt("pair %d: input defects", c));
      continue;
    }
    const double larger = std::max(signed_volume(a), signed_volume(b));
    for (BooleanOp op : {BooleanOp::kUnion, BooleanOp::kIntersection, BooleanOp::kDifference}) {
      BooleanParams p;
      p.op = op;
      const BooleanResult r = boolean_op(a, b, p);
      ++runs;
      const std::string tag = fmt("pair %d %s/%s %s", c, ka.c_str(), kb.c_str(), to_string(op));
      if (!r.mesh) {
        out.require(false, tag + ": " + first_failure(r));
        continue;
      }
      const size_t defects = validate(*r.mesh).size() + boundary_loops(*r.mesh).size();
      const double ref = oracle::csg_volume(a, b, op, 256, 7 + c);
      const double err = std::abs(signed_volume(*r.mesh) - ref) / larger;
      worst = std::max(worst, err);
      if (defects != 0 || err > 0.01) out.require(false, tag + fmt(": error %.4f%%, %zu defects", 100 * err, defects));
    }
  }
  out.require(out.pass, fmt("%zu runs, inputs %zu-%zu tris, worst error %.4f%% of larger volume", runs, min_tris,
                            max_tris, 100 * worst));
  return out;
}

// 3 -------------------------------------------------------------------------

Outcome retry_robustness() {
  Outcome out;
  const TriMesh torus = make_torus({0, 0, 0}, 1.0, 0.3, 96, 32);
  // Closed slab whose top face sits 2e-4 above the bottom of the torus.
  const TriMesh slab = make_box({-1.6, -1.6, -0.6}, {1.6, 1.6, -0.3 + 2e-4}, 32);
  BooleanParams p;
  p.max_refine_iterations = 8;
  const auto t0 = std::chrono::steady_clock::now();
  const BooleanResult r = boolean_op(torus, slab, p);
  const double sec = seconds_since(t0);
  const auto& counts = r.report.region_triangles;
  bool increasing = counts.size() >= 2;
  std::string list;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (i > 0 && counts[i] <= counts[i - 1]) increasing = false;
    list += (i ? " " : "") + std::to_string(counts[i]);
  }
  out.require(bool(r.mesh), fmt("outcome %s at level %d in %.1fs", r.report.outcome(), r.report.levels, sec));
  out.require(increasing, "region triangles " + list);
  if (r.mesh) out.require(boundary_loops(*r.mesh).empty() && validate(*r.mesh).empty(), "closed valid result");
  return out;
}

// 4 -------------------------------------------------------------------------

using PointSet = std::set<std::array<long, 3>>;

PointSet quantized(const std::vector<Vec3>& pts, double step) {
  PointSet s;
  for (const Vec3& p : pts) s.insert({std::lround(p.x / step), std::lround(p.y / step), std::lround(p.z / step)});
  return s;
}

bool on_box_crease(const Vec3& p, double tol) {
  int at_face = 0;
  for (double c : {p.x, p.y, p.z}) at_face += std::abs(std::abs(c) - 1.0) <= tol;
  return at_face >= 2;
}

// Feature nodes of the difference must equal `expected`; every feature edge
// lies on a crease of the [-1,1]^3 box and their lengths add up to `length`.
void check_features(Outcome& out, const char* name, const BooleanResult& r, const std::vector<Vec3>& expected,
                    double length) {
  if (!r.mesh) {
    out.require(false, std::string(name) + ": " + first_failure(r));
    return;
  }
  const TriMesh& m = *r.mesh;
  const double tol = std::max(1e-6, 0.01 * r.report.seam_target_edge_length);
  std::vector<Vec3> nodes;
  for (int v : r.constraints.feature_nodes(m)) nodes.push_back(m.position(v));
  const bool same = nodes.size() == expected.size() && quantized(nodes, 0.01) == quantized(expected, 0.01);
  double total = 0.0;
  bool on_crease = true;
  for (const auto& [e, id] : r.constraints.feature_edges()) {
    total += m.edge_length(e);
    on_crease = on_crease && on_box_crease((m.position(e.a) + m.position(e.b)) * 0.5, tol);
  }
  out.require(same, fmt("%s: %zu feature nodes (expected %zu)", name, nodes.size(), expected.size()));
  out.require(on_crease && std::abs(total - length) <= 1e-3 * length,
              fmt("%s: crease length %.4f (expected %.4f)", name, total, length));
  out.require(boundary_loops(m).empty() && validate(m).empty(), fmt("%s: hole-free", name));
}

Outcome sharp_features() {
  Outcome out;
  BooleanParams p;
  p.op = BooleanOp::kDifference;
  p.preserve_sharp = true;
  std::vector<Vec3> corners;
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0})
      for (double z : {-1.0, 1.0}) corners.push_back({x, y, z});

  const TriMesh box = make_box({-1, -1, -1}, {1, 1, 1}, 10);
  const BooleanResult through = boolean_op(box, make_cylinder({0.2, -0.1, -1.5}, 0.4, 3.0, 64, 16, 4), p);
  check_features(out, "through-hole", through, corners, 24.0);

  // A cylinder around the vertical edge at x = y = 1 removes that edge and
  // shortens the four crease edges meeting it.
  const double r = 0.3;
  const TriMesh coarse = make_box({-1, -1, -1}, {1, 1, 1}, 4);
  const BooleanResult corner = boolean_op(coarse, make_cylinder({1, 1, -1.5}, r, 3.0, 48, 8, 3), p);
  std::vector<Vec3> expected;
  for (const Vec3& c : corners)
    if (!(c.x == 1.0 && c.y == 1.0)) expected.push_back(c);
  for (double z : {-1.0, 1.0}) {
    expected.push_back({1.0 - r, 1.0, z});
    expected.push_back({1.0, 1.0 - r, z});
  }
  check_features(out, "corner-cut", corner, expected, 24.0 - 2.0 - 4.0 * r);
  size_t filled = 0;
  for (const auto& pr : corner.report.pairings) filled += pr.corner_triangles;
  out.require(filled >= 1, fmt("corner-cut: %zu corner-gap triangles", filled));
  return out;
}

// 5 -------------------------------------------------------------------------

std::vector<std::set<std::array<long, 3>>> loop_positions(const TriMesh& m) {
  std::vector<std::set<std::array<long, 3>>> out;
  for (const BoundaryLoop& loop : boundary_loops(m)) {
    std::vector<Vec3> pts;
    for (int v : loop.vertices) pts.push_back(m.position(v));
    out.push_back(quantized(pts, 1e-9));
  }
  return out;
}

Outcome open_mesh() {
  Outcome out;
  const std::vector<Hole> holes{{-1.5, -1.5, 0.25}, {1.5, -1.5, 0.25}, {-1.5, 1.5, 0.25}, {1.5, 1.5, 0.25},
                                {0.0, 1.6, 0.2}};
  const TriMesh sheet = make_sheet(-2.2, 2.2, -2.2, 2.2, 0.0, 44, 44, holes);
  const TriMesh cyl = make_cylinder({0.1, -0.2, -1.0}, 0.5, 2.0, 48, 16, 4);
  BooleanParams p;
  p.op = BooleanOp::kDifference;
  const BooleanResult r = boolean_op(sheet, cyl, p);
  if (!r.mesh) {
    out.require(false, first_failure(r));
    return out;
  }
  const auto before = loop_positions(sheet);
  const auto after = loop_positions(*r.mesh);
  size_t kept = 0;
  for (const auto& loop : before) kept += std::count(after.begin(), after.end(), loop) == 1;
  out.require(before.size() >= 6 && kept == before.size() && after.size() == before.size() + 1,
              fmt("%zu input loops, %zu kept unchanged, %zu result loops", before.size(), kept, after.size()));
  size_t upward = 0;
  for (int t : r.mesh->live_triangles()) upward += r.mesh->triangle_normal(t).z > 0.0;
  out.require(validate(*r.mesh).empty() && upward == r.mesh->triangle_count(),
              fmt("orientation consistent (%zu/%zu facing +z)", upward, r.mesh->triangle_count()));
  return out;
}

// 6 -------------------------------------------------------------------------

double one_sided_deviation(const TriMesh& from, const TriMesh& to) {
  const ProjectionTarget target = ProjectionTarget::mesh(to);
  double d = 0.0;
  for (int v : from.live_vertices()) d = std::max(d, distance(from.position(v), target.project(from.position(v))));
  for (int t : from.live_triangles()) {
    const auto p = from.triangle_points(t);
    const Vec3 c = (p[0] + p[1] + p[2]) / 3.0;
    d = std::max(d, distance(c, target.project(c)));
  }
  return d;
}

Outcome near_coincidence() {
  Outcome out;
  const TriMesh model = make_torus({0, 0, 0}, 1.0, 0.4, 64, 24);
  TriMesh copy = model;
  ConstraintSet c;
  for (int v : copy.live_vertices()) c.set_binding(v, VertexBinding::on_surface(0));
  const std::vector<ProjectionTarget> targets{ProjectionTarget::mesh(model)};
  Region all = Region::all(copy);
  RemeshParams rp = RemeshParams::with_target(0.09);
  rp.passes = 3;
  remesh_region(copy, all, rp, c, targets);
  const double dev = std::max(one_sided_deviation(copy, model), one_sided_deviation(model, copy));
  const double vol = signed_volume(model);

  BooleanParams p;
  p.op = BooleanOp::kDifference;
  p.max_refine_iterations = 1;
  const BooleanResult exact = boolean_op(model, copy, p);
  std::string recorded = exact.mesh ? fmt("%zu components", connected_components(*exact.mesh).size())
                                    : std::string(exact.report.outcome());
  out.require(true, fmt("copy %zu tris, deviation %.3g; tau=0 gives %s", copy.triangle_count(), dev, recorded.c_str()));

  p.tolerance = 2.0 * dev;
  p.max_refine_iterations = 2;
  const BooleanResult approx = boolean_op(model, copy, p);
  if (!approx.mesh) {
    out.require(false, "tau=2dev: " + first_failure(approx));
    return out;
  }
  const double rel = std::abs(signed_volume(*approx.mesh)) / vol;
  out.require(rel < 1e-3, fmt("tau=2dev volume %.3g%% of input", 100 * rel));
  return out;
}

// 7 -------------------------------------------------------------------------

double distance_to_segments(const Vec3& p, const std::vector<IntersectionSegment>& segs) {
  double best = std::numeric_limits<double>::max();
  for (const auto& s : segs) {
    const Vec3 d = s.p1 - s.p0;
    const double len2 = dot(d, d);
    const double t = len2 > 0.0 ? std::clamp(dot(p - s.p0, d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, distance_squared(p, s.p0 + d * t));
  }
  return std::sqrt(best);
}

Outcome precision_speed() {
  Outcome out;
  const TriMesh a = make_geodesic_sphere({0, 0, 0}, 1.0, 64);
  const TriMesh b = make_geodesic_sphere({0.9, 0.3, 0.1}, 0.8, 64);
  const SpatialIndex ia = SpatialIndex::build(a), ib = SpatialIndex::build(b);
  const auto segs = intersection_segments(a, b, intersecting_pairs(ia, a, ib, b, 0.0));
  std::vector<double> times, rms;
  for (double m : {1.0, 2.0, 3.0}) {
    BooleanParams p;
    p.seam_resolution = m;
    double best = std::numeric_limits<double>::max(), sum = 0.0;
    size_t samples = 0;
    for (int run = 0; run < 5; ++run) {
      const BooleanResult r = boolean_op(a, b, p);
      if (!r.mesh) {
        out.require(false, fmt("multiplier %.0f: ", m) + first_failure(r));
        return out;
      }
      best = std::min(best, r.report.timings.zipper);
      if (run > 0) continue;
      // Sample along the fused seam polylines, chords included.
      for (const auto& seam : r.seams) {
        for (size_t i = 0; i < seam.size(); ++i) {
          const Vec3 p0 = r.mesh->position(seam[i]), p1 = r.mesh->position(seam[(i + 1) % seam.size()]);
          for (int k = 0; k < 8; ++k) {
            const double d = distance_to_segments(p0 + (p1 - p0) * (k / 8.0), segs);
            sum += d * d;
            ++samples;
          }
        }
      }
    }
    times.push_back(best);
    rms.push_back(std::sqrt(sum / double(std::max<size_t>(samples, 1))));
  }
  out.require(times[0] > times[1] && times[1] > times[2],
              fmt("zipper time %.3f > %.3f > %.3f s", times[0], times[1], times[2]));
  out.require(rms[0] < rms[1] && rms[1] < rms[2], fmt("seam rms %.3g < %.3g < %.3g", rms[0], rms[1], rms[2]));
  return out;
}

// 8 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / fmt("ambool-acceptance-%d", int(std::random_device{}() % 100000));
  fs::create_directories(dir);
  TriMesh box = make_box({-0.7, -0.7, -0.7}, {0.7, 0.7, 0.7}, 12);
  rotate(box, normalized(Vec3{1, 2, 3}), 0.4);
  translate(box, {0.8, 0.4, 0.3});
  save_mesh(make_geodesic_sphere({0, 0, 0}, 1.0, 20), (dir / "a.obj").string(), MeshFormat::kObj);
  save_mesh(box, (dir / "b.obj").string(), MeshFormat::kObj);
  for (const char* run : {"1", "2"}) {
    const int code = run_cli({"union", (dir / "a.obj").string(), (dir / "b.obj").string(), "-o",
                              (dir / (std::string("out") + run + ".obj")).string(), "--preserve-sharp", "--simplify",
                              "--seed", "17", "--report", (dir / (std::string("report") + run + ".json")).string()});
    out.require(code == 0, fmt("run %s exit %d", run, code));
  }
  const std::string m1 = slurp(dir / "out1.obj"), m2 = slurp(dir / "out2.obj");
  const std::string r1 = slurp(dir / "report1.json"), r2 = slurp(dir / "report2.json");
  out.require(!m1.empty() && m1 == m2, fmt("mesh %zu bytes identical", m1.size()));
  out.require(!r1.empty() && r1 == r2, fmt("report %zu bytes identical", r1.size()));
  fs::remove_all(dir);
  return out;
}

// 9 -------------------------------------------------------------------------

Outcome property_suites(const std::string& tests_binary) {
  Outcome out;
  if (tests_binary.empty()) {
    out.require(false, "unit test binary not given");
    return out;
  }
  const std::string filter =
      "Properties.*:SpatialIndex.*BruteForce*:RemeshProperties.*:ZipperProperties.*:"
      "ClassifyPatchProperty.*:Projection.MeshTargetMatchesBruteForce";
  const std::string cmd = "\"" + tests_binary + "\" --gtest_filter='" + filter + "'";
  std::fflush(stdout);
  const int code = std::system(cmd.c_str());
  out.require(code == 0, fmt("property suites exit %d", code));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tests_binary = argc > 1 ? argv[1] : "";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"seam regularity", seam_regularity},
      {"volume oracle", volume_oracle},
      {"retry robustness", retry_robustness},
      {"sharp features", sharp_features},
      {"open mesh", open_mesh},
      {"near coincidence", near_coincidence},
      {"precision/speed trade", precision_speed},
      {"determinism", determinism},
      {"property suites", [&] { return property_suites(tests_binary); }},
  };
  std::vector<std::string> lines;
  bool all = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    lines.push_back(fmt("[%s] %d %s (%.1fs): ", o.pass ? "PASS" : "FAIL", id, criteria[i].first, seconds_since(t0)) +
                    o.detail);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  return all ? 0 : 1;
}
