#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ambool/constraints.hpp"
#include "ambool/error.hpp"
#include "ambool/geometry.hpp"
#include "ambool/projection.hpp"
#include "ambool/remesh.hpp"
#include "ambool/tri_mesh.hpp"

namespace ambool {

struct ZipperParams {
  double t = 0.5;
  int max_iterations = 100;
  /// Convergence tolerance on the per-step displacement; 0 selects
  /// 0.01 * target_edge_length.
  double epsilon = 0.0;
  double target_edge_length = 1.0;
  bool use_segment_steps = false;

  double tolerance() const { return epsilon > 0.0 ? epsilon : 0.01 * target_edge_length; }
  void check() const;
};

/// Nearest-vertex maps between two loops, by loop position.
struct LoopCorrespondence {
  std::vector<int> forward;   // loop1 position -> loop2 position
  std::vector<int> backward;  // loop2 position -> loop1 position
  // Constrained vertices that no vertex of the other loop points at; they
  // are left out of the matching and closed by corner triangles.
  std::vector<uint8_t> excluded1;
  std::vector<uint8_t> excluded2;
  size_t mismatches = 0;
  bool bijective = false;
};

/// Position in `loop` of the vertex nearest to `q`; ties go to the lowest
/// position. Throws Error(kInvalidLoop) for an empty loop.
int nearest_on_loop(const TriMesh& mesh, const BoundaryLoop& loop, const Vec3& q);

LoopCorrespondence check_correspondence(const TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                                        const ConstraintSet* constraints = nullptr);

struct StepDisplacement {
  double first = 0.0;
  double second = 0.0;
};

/// One simultaneous ICP step of both loops. Fixed vertices stay put, polyline
/// vertices snap to their polyline, everything else to its loop's target.
StepDisplacement evolve_step(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                             const ZipperParams& params, const ProjectionTarget& proj1,
                             const ProjectionTarget& proj2, const ConstraintSet* constraints = nullptr,
                             std::span<const IntersectionSegment> segments = {});

/// Split/collapse/flip/smooth around both loops, then re-trace them.
std::pair<BoundaryLoop, BoundaryLoop> refine_seam(TriMesh& mesh, const BoundaryLoop& loop1,
                                                  const BoundaryLoop& loop2, const RemeshParams& params,
                                                  ConstraintSet& constraints,
                                                  std::span<const ProjectionTarget> targets = {});

/// Appends one triangle per run of excluded loop vertices, closing the gap
/// the fused seam would otherwise leave. Returns the number added.
size_t fill_corner_gaps(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                        const LoopCorrespondence& corr);

struct SeamDiagnostic {
  enum class Kind { kNonManifoldEdge, kOrientationConflict, kOrderReversal, kOpenEdge };
  Kind kind;
  std::string message;
};

struct MergeResult {
  std::vector<int> seam;  // fused vertices in loop1 order
  std::vector<SeamDiagnostic> diagnostics;
};

/// Fuses every matched pair into the loop1 vertex placed at the pair's
/// midpoint (then projected onto `reproject_to` when given).
/// Throws Error(kPrecondition) for a non-bijective correspondence.
MergeResult merge_loops(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2,
                        const LoopCorrespondence& corr, const ProjectionTarget* reproject_to = nullptr,
                        ConstraintSet* constraints = nullptr);

struct SeamReport {
  int iterations = 0;
  double final_gap = 0.0;
  size_t corner_triangles = 0;
  size_t loop1_size = 0;
  size_t loop2_size = 0;
  std::vector<int> seam;
  std::vector<SeamDiagnostic> diagnostics;
};

class ZipperTimeout : public Error {
 public:
  ZipperTimeout(const std::string& what, LoopCorrespondence best, int iterations)
      : Error(ErrorCode::kZipperTimeout, what), best_(std::move(best)), iterations_(iterations) {}
  const LoopCorrespondence& best() const { return best_; }
  int iterations() const { return iterations_; }

 private:
  LoopCorrespondence best_;
  int iterations_;
};

/// Evolves, refines and merges a loop pair. `target1`/`target2` index into
/// `targets` (or -1 for free evolution); free loop vertices are bound to
/// their loop's target so that refinement keeps them on it.
SeamReport zipper(TriMesh& mesh, const BoundaryLoop& loop1, const BoundaryLoop& loop2, const ZipperParams& params,
                  std::span<const ProjectionTarget> targets, int target1, int target2, ConstraintSet& constraints,
                  std::span<const IntersectionSegment> segments = {});

}  // namespace ambool
