#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ambool/constraints.hpp"
#include "ambool/projection.hpp"
#include "ambool/remesh.hpp"
#include "ambool/spatial_index.hpp"
#include "ambool/tri_mesh.hpp"
#include "ambool/zipper.hpp"

namespace ambool {

enum class BooleanOp { kUnion, kIntersection, kDifference };
enum class Precision { kApproximate, kPrecise };
enum class Containment { kInside, kOutside, kAmbiguous };

const char* to_string(BooleanOp op);
const char* to_string(Containment c);

struct BooleanParams {
  BooleanOp op = BooleanOp::kUnion;
  double tolerance = 0.0;
  int max_refine_iterations = 5;
  int rays = 11;
  Precision precision = Precision::kPrecise;
  bool preserve_sharp = false;
  double sharp_angle = kPi / 6.0;
  double seam_resolution = 1.0;
  bool post_simplify = false;
  /// Edge length used for refinement and seams; 0 picks the median edge
  /// length of the initial intersection sets.
  double target_edge_length = 0.0;
  uint64_t seed = 0;
  double zipper_step = 0.5;
  int zipper_iterations = 100;
  bool use_segment_steps = true;
  /// With preserve_sharp, pad loops that run along a crease with a strip of
  /// free triangles before zippering.
  bool border_strips = true;

  /// Throws Error(kInvalidArgument).
  void check() const;
};

struct SeamStats {
  size_t edges = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double max_distance_a = 0.0;
  double max_distance_b = 0.0;
};

struct LoopPairReport {
  size_t loop_a_size = 0;
  size_t loop_b_size = 0;
  int iterations = 0;
  size_t seam_vertices = 0;
  size_t corner_triangles = 0;
  size_t strip_triangles = 0;
};

struct StageTimings {
  double overhead = 0.0;
  double intersection = 0.0;
  double zipper = 0.0;
};

struct BooleanReport {
  BooleanOp op = BooleanOp::kUnion;
  bool success = false;
  int levels = 0;
  /// Triangles in the refinement region at each level (level 0 first).
  std::vector<size_t> region_triangles;
  size_t patches = 0;
  size_t loops = 0;
  size_t unpaired_loops = 0;
  /// Surviving patches dropped because every vertex touched the deleted band.
  size_t islands_removed = 0;
  std::vector<LoopPairReport> pairings;
  std::optional<SeamStats> seam;
  double target_edge_length = 0.0;
  double seam_target_edge_length = 0.0;
  size_t triangles_added = 0;
  size_t triangles_deleted = 0;
  size_t simplify_collapses = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;
  StageTimings timings;

  const char* outcome() const { return success ? "success" : "failed-after-retries"; }
};

struct BooleanResult {
  std::optional<TriMesh> mesh;
  /// Feature constraints carried into the result (preserve_sharp).
  ConstraintSet constraints;
  /// Fused seam vertices per zippered loop pair, in result indices.
  std::vector<std::vector<int>> seams;
  BooleanReport report;
};

struct IntersectionSets {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<std::pair<int, int>> pairs;
  bool empty() const { return pairs.empty(); }
};

IntersectionSets find_intersection_sets(const TriMesh& mesh_a, const TriMesh& mesh_b, const SpatialIndex& index_a,
                                        const SpatialIndex& index_b, double tolerance);

/// Deletes `triangles`, then keeps removing the one-rings of bowtie vertices
/// until every boundary is a simple cycle. Returns the boundary loops through
/// vertices of removed triangles; `removed` receives every deleted triangle.
/// Throws Error(kEmptyPatch) when nothing is left.
std::vector<BoundaryLoop> delete_and_clean(TriMesh& mesh, std::span<const int> triangles,
                                           std::vector<int>* removed = nullptr);

/// Majority vote of `rays` rays cast along the surface normal from
/// area-weighted random points of the patch.
Containment classify_patch(const TriMesh& mesh, std::span<const int> patch, const TriMesh& containment,
                           const SpatialIndex& index, int rays, std::mt19937_64& rng);

struct PatchSelection {
  std::vector<uint8_t> keep_a;
  std::vector<uint8_t> flip_a;
  std::vector<uint8_t> keep_b;
  std::vector<uint8_t> flip_b;
};

/// Throws Error(kAmbiguousClassification) when any patch is ambiguous.
PatchSelection select_patches(BooleanOp op, std::span<const Containment> a, std::span<const Containment> b);

struct LoopPairs {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unpaired_a;
  std::vector<int> unpaired_b;
};

/// Mutual plurality pairing: every loop vertex votes for the loop of its
/// nearest vertex on the other side. Throws Error(kLoopMismatch) on unpaired
/// loops unless `allow_unpaired`.
LoopPairs pair_loops(const TriMesh& mesh_a, std::span<const BoundaryLoop> loops_a, const TriMesh& mesh_b,
                     std::span<const BoundaryLoop> loops_b, bool allow_unpaired = false);

/// Tags interior edges whose normals differ by more than `threshold` and
/// chains them into polylines. Feature nodes are fixed, the rest bound to
/// their polyline; `surface` is recorded on the bindings.
ConstraintSet detect_sharp_edges(const TriMesh& mesh, double threshold, int surface = -1);

/// Whether the loop runs along a feature edge or holds a feature vertex that
/// lost all of its feature edges.
bool needs_border_strip(const TriMesh& mesh, const BoundaryLoop& loop, const ConstraintSet& constraints);

/// Appends one ring of triangles outside `loop`, new vertices offset by
/// `width` and projected onto `surface`. No-op (returns 0) when the loop does
/// not need a strip. `outer` receives the new boundary loop.
size_t append_border_strip(TriMesh& mesh, const BoundaryLoop& loop, double width, ConstraintSet& constraints,
                           const ProjectionTarget& surface, int surface_id, BoundaryLoop* outer = nullptr);

struct SimplifyStats {
  size_t collapses = 0;
  size_t triangles_before = 0;
  size_t triangles_after = 0;
};

/// Greedy shortest-edge decimation inside `region`. Vertices with triangles
/// outside the region, boundary vertices and feature nodes are kept; feature
/// vertices and `curves` only collapse along themselves. New edges stay below
/// `max_edge_length` and the surface within `max_deviation` of its previous
/// shape and of each vertex's projection target.
SimplifyStats post_simplify(TriMesh& mesh, const Region& region, double max_edge_length, double max_deviation,
                            ConstraintSet& constraints, std::span<const ProjectionTarget> targets,
                            std::span<const std::vector<int>> curves = {});

/// Full pipeline. Inputs are never modified; on failure the result carries no
/// mesh and `report.failures` lists what went wrong at each level.
BooleanResult boolean_op(const TriMesh& mesh_a, const TriMesh& mesh_b, const BooleanParams& params);

}  // namespace ambool
