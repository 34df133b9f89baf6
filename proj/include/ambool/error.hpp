#pragma once

#include <stdexcept>
#include <string>

namespace ambool {

enum class ErrorCode {
  kInvalidEdge,
  kInvalidVertex,
  kTopology,          // link condition or manifoldness would be violated
  kGeometry,          // a triangle would invert or degenerate
  kBoundaryEdge,      // operation needs an interior edge
  kDuplicateEdge,     // flip would create an edge that already exists
  kNonManifold,       // more than two triangles on one edge
  kDegenerateInput,
  kStaleIndex,        // spatial index out of date with its mesh
  kInvalidLoop,
  kPrecondition,
  kZipperTimeout,
  kLoopMismatch,
  kAmbiguousClassification,
  kEmptyPatch,
  kParse,
  kIo,
  kInvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ambool
