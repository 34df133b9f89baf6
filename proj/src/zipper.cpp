#include "ambool/zipper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "ambool/parallel.hpp"
#include "nearest_tree.hpp"

namespace ambool {

void ZipperParams::check() const {
  if (!(t > 0.0 && t <= 0.5)) throw Error(ErrorCode::kInvalidArgument, "zipper step fraction must lie in (0, 0.5]");
  if (!(target_edge_length > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zipper target edge length must be positive");
  if (epsilon < 0.0) throw Error(ErrorCode::kInvalidArgument, "zipper tolerance must be positive");
  if (max_iterations < 0) throw Error(ErrorCode::kInvalidArgument, "iteration cap must be non-negative");
}

int nearest_on_loop(const TriMesh& mesh, const BoundaryLoop& loop, const Vec3& q) {
  if (loop.vertices.empty()) throw Error(ErrorCode::kInvalidLoop, "nearest query on an empty loop");
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i < loop.size(); ++i) {
    const double d = distance_squared(mesh.position(loop.vertices[i]), q);
    if (d < best_d) {
      best_d = d;
      best = int(i);
    }
  }
  return best;
}

namespace {

bool is_constrained(const ConstraintSet* c, int v) { return c && c->binding(v).is_feature(); }

PointTree loop_tree(const TriMesh& mesh, const BoundaryLoop& loop) {
  std::vector<Vec3> pts;
  pts.reserve(loop.size());
  for (int v : loop.vertices) pts.push_back(mesh.position(v));
  return PointTree(std::move(pts));
}

std::vector<int> nearest_all(const TriMesh& mesh, const BoundaryLoop& from, const BoundaryLoop& to) {
  const PointTree tree = loop_tree(mesh, to);
  std::vector<int> out(from.size());
  parallel_for(from.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) out[i] = tree.nearest(mesh.position(from.vertices[i]));
  }, 32);
  return out;
}

// Previous position in `loop` before `j`, skipping excluded entries.
int previous_kept(const std::vector<uint8_t>& excluded, int j) {
  const int n = int(excluded.size());
  for (int k = 1; k <= n; ++k) {
    const int p = ((j - k) % n + n) % n;
    if (!excluded[p]) return p;
  }
  return j;
}

}  // namespace

LoopCorrespondence check_correspondence(const TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                                        const ConstraintSet* constraints) {
  if (loop1.vertices.empty() || loop2.vertices.empty()) {
    throw Error(ErrorCode::kInvalidLoop, "correspondence of an empty loop");
  }
  LoopCorrespondence c;
  c.forward = nearest_all(mesh, loop1, loop2);
  c.backward = nearest_all(mesh, loop2, loop1);
  std::vector<int> votes1(loop1.size(), 0), votes2(loop2.size(), 0);
  for (int j : c.forward) ++votes2[j];
  for (int i : c.backward) ++votes1[i];
  c.excluded1.assign(loop1.size(), 0);
  c.excluded2.assign(loop2.size(), 0);
  for (size_t i = 0; i < loop1.size(); ++i) {
    c.excluded1[i] = votes1[i] == 0 && is_constrained(constraints, loop1.vertices[i]);
  }
  for (size_t j = 0; j < loop2.size(); ++j) {
    c.excluded2[j] = votes2[j] == 0 && is_constrained(constraints, loop2.vertices[j]);
  }
  size_t kept1 = 0, kept2 = 0;
  for (size_t i = 0; i < loop1.size(); ++i) {
    if (c.excluded1[i]) continue;
    ++kept1;
    const int j = c.forward[i];
    if (c.excluded2[j] || c.backward[j] != int(i)) ++c.mismatches;
  }
  for (size_t j = 0; j < loop2.size(); ++j) {
    if (c.excluded2[j]) continue;
    ++kept2;
    const int i = c.backward[j];
    if (c.excluded1[i] || c.forward[i] != int(j)) ++c.mismatches;
  }
  if (kept1 != kept2) c.mismatches += kept1 > kept2 ? kept1 - kept2 : kept2 - kept1;
  c.bijective = c.mismatches == 0 && kept1 > 0;
  return c;
}

StepDisplacement evolve_step(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                             const ZipperParams& params, const ProjectionTarget& proj1,
                             const ProjectionTarget& proj2, const ConstraintSet* constraints,
                             std::span<const IntersectionSegment> segments) {
  if (loop1.vertices.empty() || loop2.vertices.empty()) throw Error(ErrorCode::kInvalidLoop, "evolve of an empty loop");
  const bool use_segments = params.use_segment_steps && !segments.empty();
  const SegmentTree segment_tree(use_segments ? segments : std::span<const IntersectionSegment>{});
  auto targets_for = [&](const BoundaryLoop& from, const BoundaryLoop& to, const ProjectionTarget& proj) {
    const PointTree tree = loop_tree(mesh, to);
    std::vector<Vec3> out(from.size());
    parallel_for(from.size(), [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        const int v = from.vertices[i];
        const Vec3& p = mesh.position(v);
        const VertexBinding b = constraints ? constraints->binding(v) : VertexBinding{};
        if (b.kind == VertexBinding::Kind::kFixed) {
          out[i] = p;
          continue;
        }
        Vec3 goal = mesh.position(to.vertices[tree.nearest(p)]);
        if (use_segments) {
          goal = b.kind == VertexBinding::Kind::kOnPolyline ? segment_tree.closest(p) : (goal + segment_tree.closest(p)) * 0.5;
        }
        Vec3 next = p * (1.0 - params.t) + goal * params.t;
        if (b.kind == VertexBinding::Kind::kOnPolyline) {
          next = constraints->project_to_polyline(b.id, next);
        } else {
          next = proj.project(next);
        }
        out[i] = next;
      }
    }, 16);
    return out;
  };
  const std::vector<Vec3> next1 = targets_for(loop1, loop2, proj1);
  const std::vector<Vec3> next2 = targets_for(loop2, loop1, proj2);
  StepDisplacement d;
  for (size_t i = 0; i < loop1.size(); ++i) {
    const int v = loop1.vertices[i];
    d.first = std::max(d.first, distance(mesh.position(v), next1[i]));
    mesh.set_position(v, next1[i]);
  }
  for (size_t j = 0; j < loop2.size(); ++j) {
    const int v = loop2.vertices[j];
    d.second = std::max(d.second, distance(mesh.position(v), next2[j]));
    mesh.set_position(v, next2[j]);
  }
  return d;
}

namespace {

BoundaryLoop retrace(const TriMesh& mesh, const BoundaryLoop& old) {
  for (int v : old.vertices) {
    if (mesh.vertex_alive(v) && mesh.is_boundary_vertex(v)) {
      BoundaryLoop loop = trace_boundary_loop(mesh, v);
      loop.source = old.source;
      loop.patch = old.patch;
      return loop;
    }
  }
  throw Error(ErrorCode::kInvalidLoop, "boundary loop vanished during seam refinement");
}


size_t unclaimed(size_t n, const std::vector<int>& partners) {
  std::vector<uint8_t> hit(n, 0);
  for (int j : partners) hit[j] = 1;
  return size_t(std::count(hit.begin(), hit.end(), 0));
}

// Collapses up to `excess` vertices of `loop` that no vertex of the other
// loop points at into their nearer loop neighbour.
size_t drop_unclaimed(TriMesh& mesh, const BoundaryLoop& loop, const std::vector<int>& partners, size_t excess,
                      ConstraintSet& constraints) {
  std::vector<int> votes(loop.size(), 0);
  for (int j : partners) ++votes[j];
  size_t dropped = 0;
  const int n = int(loop.size());
  for (int i = 0; i < n && dropped < excess; ++i) {
    const int v = loop.vertices[i];
    if (votes[i] != 0 || constraints.binding(v).kind != VertexBinding::Kind::kOnSurface) continue;
    if (!mesh.vertex_alive(v)) continue;
    const int prev = loop.at(i - 1), next = loop.at(i + 1);
    if (!mesh.vertex_alive(prev) || !mesh.vertex_alive(next)) continue;
    const int keep = distance_squared(mesh.position(v), mesh.position(prev)) <=
                             distance_squared(mesh.position(v), mesh.position(next))
                         ? prev
                         : next;
    const EdgeKey e(v, keep);
    if (!mesh.has_edge(v, keep) || !mesh.can_collapse(e, mesh.position(keep), keep)) continue;
    collapse_edge(mesh, e, mesh.position(keep), keep, &constraints);
    ++dropped;
  }
  return dropped;
}

}  // namespace

std::pair<BoundaryLoop, BoundaryLoop> refine_seam(TriMesh& mesh, const BoundaryLoop& loop1,
                                                  const BoundaryLoop& loop2, const RemeshParams& params,
                                                  ConstraintSet& constraints,
                                                  std::span<const ProjectionTarget> targets) {
  std::vector<int> seed;
  for (const BoundaryLoop* loop : {&loop1, &loop2}) {
    for (int v : loop->vertices) {
      if (!mesh.vertex_alive(v)) continue;
      for (int t : mesh.vertex_triangles(v)) seed.push_back(t);
    }
  }
  Region region(mesh, seed);
  region.grow_one_ring(mesh);
  remesh_region(mesh, region, params, constraints, targets);
  return {retrace(mesh, loop1), retrace(mesh, loop2)};
}

size_t fill_corner_gaps(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                        const LoopCorrespondence& corr) {
  size_t added = 0;
  auto fill = [&](const BoundaryLoop& loop, const std::vector<uint8_t>& excluded) {
    const int n = int(loop.size());
    if (std::all_of(excluded.begin(), excluded.end(), [](uint8_t x) { return x != 0; })) return;
    for (int i = 0; i < n; ++i) {
      // Start of a run of excluded vertices preceded by a kept one.
      if (!excluded[i] || excluded[((i - 1) % n + n) % n]) continue;
      const int prev = loop.at(i - 1);
      std::vector<int> run;
      int k = i;
      while (excluded[k % n]) run.push_back(loop.at(k++));
      run.push_back(loop.at(k));
      for (size_t r = 0; r + 1 < run.size(); ++r) {
        mesh.add_triangle(run[r], prev, run[r + 1]);
        ++added;
      }
    }
  };
  fill(loop1, corr.excluded1);
  fill(loop2, corr.excluded2);
  return added;
}

MergeResult merge_loops(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                        const LoopCorrespondence& corr, const ProjectionTarget* reproject_to,
                        ConstraintSet* constraints) {
  if (!corr.bijective) throw Error(ErrorCode::kPrecondition, "merge requires a bijective correspondence");
  MergeResult result;
  std::vector<int> kept1;
  for (size_t i = 0; i < loop1.size(); ++i) {
    if (!corr.excluded1[i]) kept1.push_back(int(i));
  }
  size_t reversals = 0;
  for (size_t k = 0; k < kept1.size(); ++k) {
    const int j = corr.forward[kept1[k]];
    const int jn = corr.forward[kept1[(k + 1) % kept1.size()]];
    if (kept1.size() > 1 && jn != previous_kept(corr.excluded2, j)) ++reversals;
  }
  if (reversals > 0) {
    result.diagnostics.push_back({SeamDiagnostic::Kind::kOrderReversal,
                                  std::to_string(reversals) + " matched pairs break the reversed loop order"});
  }

  for (int i : kept1) {
    const int u = loop1.vertices[i];
    const int w = loop2.vertices[corr.forward[i]];
    const VertexBinding bu = constraints ? constraints->binding(u) : VertexBinding{};
    const VertexBinding bw = constraints ? constraints->binding(w) : VertexBinding{};
    Vec3 pos = (mesh.position(u) + mesh.position(w)) * 0.5;
    if (bu.kind == VertexBinding::Kind::kFixed) {
      pos = mesh.position(u);
    } else if (bw.kind == VertexBinding::Kind::kFixed) {
      pos = mesh.position(w);
    } else if (bu.kind == VertexBinding::Kind::kOnPolyline) {
      pos = constraints->project_to_polyline(bu.id, pos);
    } else if (bw.kind == VertexBinding::Kind::kOnPolyline) {
      pos = constraints->project_to_polyline(bw.id, pos);
    } else if (reproject_to) {
      pos = reproject_to->project(pos);
    }
    std::vector<std::pair<int, int>> moved_features;
    if (constraints) {
      for (int x : mesh.vertex_neighbors(w)) {
        const int pid = constraints->feature_polyline(EdgeKey(w, x));
        if (pid >= 0) {
          moved_features.emplace_back(x, pid);
          constraints->remove_feature_edge(EdgeKey(w, x));
        }
      }
      if (bu.kind == VertexBinding::Kind::kFree || (!bu.is_feature() && bw.is_feature())) {
        constraints->set_binding(u, bw);
      }
      constraints->set_binding(w, VertexBinding::free());
    }
    mesh.set_position(u, pos);
    mesh.replace_vertex(w, u);
    if (constraints) {
      for (const auto& [x, pid] : moved_features) {
        if (x != u) constraints->add_feature_edge(EdgeKey(u, x), pid);
      }
    }
    result.seam.push_back(u);
  }

  const std::unordered_set<int> seam(result.seam.begin(), result.seam.end());
  size_t non_manifold = 0, conflicts = 0, open = 0;
  for (int u : result.seam) {
    for (int x : mesh.vertex_neighbors(u)) {
      if (x < u && seam.count(x)) continue;  // count each seam edge once
      std::array<int, 2> inc{};
      const int n = mesh.edge_triangles(EdgeKey(u, x), inc);
      if (n > 2) {
        ++non_manifold;
      } else if (n == 1 && seam.count(x)) {
        ++open;
      } else if (n == 2) {
        auto forward = [&](int t) {
          const Triangle& tri = mesh.triangle(t);
          for (int k = 0; k < 3; ++k) {
            if (tri[k] == u && tri[(k + 1) % 3] == x) return true;
          }
          return false;
        };
        if (forward(inc[0]) == forward(inc[1])) ++conflicts;
      }
    }
  }
  if (non_manifold) {
    result.diagnostics.push_back(
        {SeamDiagnostic::Kind::kNonManifoldEdge, std::to_string(non_manifold) + " non-manifold seam edges"});
  }
  if (conflicts) {
    result.diagnostics.push_back(
        {SeamDiagnostic::Kind::kOrientationConflict, std::to_string(conflicts) + " seam edges with conflicting winding"});
  }
  if (open) {
    result.diagnostics.push_back({SeamDiagnostic::Kind::kOpenEdge, std::to_string(open) + " seam edges left open"});
  }
  return result;
}

SeamReport zipper(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2, const ZipperParams& params,
                  std::span<const ProjectionTarget> targets, int target1, int target2, ConstraintSet& constraints,
                  std::span<const IntersectionSegment> segments) {
  params.check();
  const ProjectionTarget none;
  auto target = [&](int id) -> const ProjectionTarget& {
    return id >= 0 && size_t(id) < targets.size() ? targets[id] : none;
  };
  BoundaryLoop l1 = loop1, l2 = loop2;
  for (auto [loop, id] : {std::pair{&l1, target1}, std::pair{&l2, target2}}) {
    if (id < 0) continue;
    for (int v : loop->vertices) {
      if (constraints.binding(v).kind == VertexBinding::Kind::kFree) {
        constraints.set_binding(v, VertexBinding::on_surface(id));
      }
    }
  }

  RemeshParams remesh = RemeshParams::with_target(params.target_edge_length);
  remesh.max_collapse_stretch = 1.5;
  const double eps = params.tolerance();
  double last_step = std::numeric_limits<double>::infinity();
  LoopCorrespondence best;
  size_t best_mismatch = std::numeric_limits<size_t>::max();
  SeamReport report;
  bool converged = false;
  LoopCorrespondence corr;
  size_t stall_best = std::numeric_limits<size_t>::max();
  int stalled = 0;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    corr = check_correspondence(mesh, l1, l2, &constraints);
    if (corr.mismatches < best_mismatch) {
      best_mismatch = corr.mismatches;
      best = corr;
    }
    if (corr.bijective && last_step < eps) {
      converged = true;
      report.iterations = iter;
      break;
    }
    const StepDisplacement d =
        evolve_step(mesh, l1, l2, params, target(target1), target(target2), &constraints, segments);
    last_step = std::max(d.first, d.second);
    if (corr.mismatches < stall_best) {
      stall_best = corr.mismatches;
      stalled = 0;
    } else {
      ++stalled;
    }
    // Local surpluses that refinement cannot fix are trimmed directly.
    if (stalled >= 3 && !corr.bijective) {
      if (l1.size() > l2.size()) {
        drop_unclaimed(mesh, l1, corr.backward, l1.size() - l2.size(), constraints);
      } else if (l2.size() > l1.size()) {
        drop_unclaimed(mesh, l2, corr.forward, l2.size() - l1.size(), constraints);
      } else {
        const size_t k = std::min(unclaimed(l1.size(), corr.backward), unclaimed(l2.size(), corr.forward));
        drop_unclaimed(mesh, l2, corr.forward, drop_unclaimed(mesh, l1, corr.backward, k, constraints), constraints);
      }
      l1 = retrace(mesh, l1);
      l2 = retrace(mesh, l2);
      stall_best = std::numeric_limits<size_t>::max();
      stalled = 0;
    } else if (!corr.bijective) {
      std::tie(l1, l2) = refine_seam(mesh, l1, l2, remesh, constraints, targets);
    }
  }
  if (!converged) {
    throw ZipperTimeout("zipper did not reach a bijective correspondence within " +
                            std::to_string(params.max_iterations) + " iterations",
                        best, params.max_iterations);
  }

  report.loop1_size = l1.size();
  report.loop2_size = l2.size();
  for (size_t i = 0; i < l1.size(); ++i) {
    if (corr.excluded1[i]) continue;
    report.final_gap = std::max(report.final_gap,
                                distance(mesh.position(l1.vertices[i]), mesh.position(l2.vertices[corr.forward[i]])));
  }
  report.corner_triangles = fill_corner_gaps(mesh, l1, l2, corr);
  MergeResult merged = merge_loops(mesh, l1, l2, corr, target1 >= 0 ? &target(target1) : nullptr, &constraints);
  report.seam = std::move(merged.seam);
  report.diagnostics = std::move(merged.diagnostics);
  return report;
}

}  // namespace ambool
