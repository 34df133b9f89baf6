#pragma once

#include <iosfwd>
#include <string>

#include "ambool/tri_mesh.hpp"

namespace ambool {

enum class MeshFormat { kObj, kStlAscii, kStlBinary };

const char* to_string(MeshFormat f);

struct LoadDiagnostics {
  size_t dropped_degenerate = 0;
  size_t merged_vertices = 0;
  size_t unreferenced_vertices = 0;
  double weld_tolerance = 0.0;
};

struct MeshFile {
  MeshFormat format = MeshFormat::kObj;
  std::string path;
  TriMesh mesh;
  LoadDiagnostics diagnostics;
};

/// Picks the reader from the extension (.obj, .stl; STL flavour sniffed from
/// the contents). Throws Error(kIo) for unreadable files, Error(kParse) with
/// "path:line: ..." for malformed input and Error(kNonManifold) listing the
/// offending edges.
MeshFile load_mesh(const std::string& path);

/// Polygons are fan-triangulated; faces that repeat a vertex are dropped.
MeshFile read_obj(std::istream& in, const std::string& name = "<obj>");
/// Welds corners closer than 1e-6 of the bounding-box diagonal.
MeshFile read_stl(std::istream& in, const std::string& name = "<stl>");

/// Throws Error(kIo) when the file cannot be written.
void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format);
/// OBJ positions are written with round-trip precision.
void write_obj(const TriMesh& mesh, std::ostream& out);
void write_stl(const TriMesh& mesh, std::ostream& out, bool binary);

/// Format implied by the extension; OBJ when unknown, binary for .stl.
MeshFormat format_for_path(const std::string& path);

}  // namespace ambool
