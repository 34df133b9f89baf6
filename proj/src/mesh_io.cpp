#include "ambool/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "ambool/error.hpp"

namespace ambool {

const char* to_string(MeshFormat f) {
  switch (f) {
    case MeshFormat::kObj: return "obj";
    case MeshFormat::kStlAscii: return "stl-ascii";
    case MeshFormat::kStlBinary: return "stl-binary";
  }
  return "?";
}

namespace {

std::string lower_extension(const std::string& path) {
  const size_t dot = path.find_last_of('.');
  const size_t slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext;
}

[[noreturn]] void parse_error(const std::string& name, size_t line, const std::string& msg) {
  throw Error(ErrorCode::kParse, name + ":" + std::to_string(line) + ": " + msg);
}

// Drops faces that repeat a vertex and unreferenced vertices, then checks
// that no edge carries more than two faces.
TriMesh assemble(const std::vector<Vec3>& positions, std::vector<Triangle> tris, const std::string& name,
                 LoadDiagnostics& diag) {
  std::vector<Triangle> kept;
  kept.reserve(tris.size());
  for (const Triangle& t : tris) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      ++diag.dropped_degenerate;
    } else {
      kept.push_back(t);
    }
  }
  std::map<EdgeKey, int> counts;
  for (const Triangle& t : kept) {
    for (int k = 0; k < 3; ++k) ++counts[EdgeKey(t[k], t[(k + 1) % 3])];
  }
  std::string bad;
  size_t nbad = 0;
  for (const auto& [e, n] : counts) {
    if (n <= 2) continue;
    if (nbad++ < 16) bad += " (" + std::to_string(e.a + 1) + "," + std::to_string(e.b + 1) + ")";
  }
  if (nbad > 0) {
    throw Error(ErrorCode::kNonManifold,
                name + ": " + std::to_string(nbad) + " edges have more than two faces:" + bad + (nbad > 16 ? " ..." : ""));
  }
  std::vector<int> remap(positions.size(), -1);
  for (const Triangle& t : kept) {
    for (int v : t) remap[v] = 0;
  }
  std::vector<Vec3> used;
  for (size_t v = 0; v < positions.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = int(used.size());
    used.push_back(positions[v]);
  }
  for (Triangle& t : kept) {
    for (int& v : t) v = remap[v];
  }
  diag.unreferenced_vertices = positions.size() - used.size();
  return TriMesh(std::move(used), std::move(kept));
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Grid-hashed welding of corner positions.
class Welder {
 public:
  explicit Welder(double tol) : tol_(tol), inv_(tol > 0.0 ? 1.0 / tol : 0.0) {}

  int add(const Vec3& p) {
    const Cell c = cell(p);
    if (tol_ > 0.0) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const auto it = grid_.find({c[0] + dx, c[1] + dy, c[2] + dz});
            if (it == grid_.end()) continue;
            for (int v : it->second) {
              if (distance(points_[v], p) <= tol_) return v;
            }
          }
        }
      }
    } else {
      const auto it = grid_.find(c);
      if (it != grid_.end()) {
        for (int v : it->second) {
          if (points_[v] == p) return v;
        }
      }
    }
    points_.push_back(p);
    grid_[c].push_back(int(points_.size()) - 1);
    return int(points_.size()) - 1;
  }

  const std::vector<Vec3>& points() const { return points_; }

 private:
  using Cell = std::array<long long, 3>;
  struct CellHash {
    size_t operator()(const Cell& c) const noexcept {
      return size_t(c[0] * 73856093LL) ^ size_t(c[1] * 19349663LL) ^ size_t(c[2] * 83492791LL);
    }
  };
  Cell cell(const Vec3& p) const {
    if (inv_ == 0.0) {
      return {std::bit_cast<long long>(p.x), std::bit_cast<long long>(p.y), std::bit_cast<long long>(p.z)};
    }
    return {(long long)std::floor(p.x * inv_), (long long)std::floor(p.y * inv_), (long long)std::floor(p.z * inv_)};
  }

  double tol_;
  double inv_;
  std::vector<Vec3> points_;
  std::unordered_map<Cell, std::vector<int>, CellHash> grid_;
};

MeshFile weld_stl(const std::vector<std::array<Vec3, 3>>& facets, const std::string& name, MeshFormat format) {
  MeshFile f;
  f.format = format;
  f.path = name;
  Aabb box;
  for (const auto& t : facets) {
    for (const Vec3& p : t) box.extend(p);
  }
  const double tol = facets.empty() ? 0.0 : 1e-6 * box.diagonal();
  f.diagnostics.weld_tolerance = tol;
  Welder welder(tol);
  std::vector<Triangle> tris;
  tris.reserve(facets.size());
  for (const auto& t : facets) tris.push_back({welder.add(t[0]), welder.add(t[1]), welder.add(t[2])});
  f.diagnostics.merged_vertices = 3 * facets.size() - welder.points().size();
  f.mesh = assemble(welder.points(), std::move(tris), name, f.diagnostics);
  return f;
}

MeshFile read_stl_binary(const std::string& data, const std::string& name) {
  uint32_t n = 0;
  std::memcpy(&n, data.data() + 80, 4);
  std::vector<std::array<Vec3, 3>> facets(n);
  for (uint32_t i = 0; i < n; ++i) {
    const char* rec = data.data() + 84 + size_t(i) * 50;
    for (int k = 0; k < 3; ++k) {
      float xyz[3];
      std::memcpy(xyz, rec + 12 + 12 * k, 12);
      facets[i][k] = {xyz[0], xyz[1], xyz[2]};
    }
  }
  return weld_stl(facets, name, MeshFormat::kStlBinary);
}

MeshFile read_stl_ascii(const std::string& data, const std::string& name) {
  std::vector<std::array<Vec3, 3>> facets;
  std::istringstream in(data);
  std::string line;
  size_t lineno = 0;
  std::array<Vec3, 3> cur;
  int corners = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    if (tok[0] == "facet") {
      if (corners >= 0) parse_error(name, lineno, "facet opened inside a facet");
      corners = 0;
    } else if (tok[0] == "vertex") {
      if (corners < 0) parse_error(name, lineno, "vertex outside a facet");
      if (corners >= 3) parse_error(name, lineno, "facet has more than three vertices");
      double x, y, z;
      if (tok.size() != 4 || !parse_double(tok[1], x) || !parse_double(tok[2], y) || !parse_double(tok[3], z)) {
        parse_error(name, lineno, "malformed vertex");
      }
      cur[size_t(corners++)] = {x, y, z};
    } else if (tok[0] == "endfacet") {
      if (corners != 3) parse_error(name, lineno, "facet does not have three vertices");
      facets.push_back(cur);
      corners = -1;
    } else if (tok[0] != "solid" && tok[0] != "endsolid" && tok[0] != "outer" && tok[0] != "endloop") {
      parse_error(name, lineno, "unexpected token '" + std::string(tok[0]) + "'");
    }
  }
  if (corners >= 0) parse_error(name, lineno, "unterminated facet");
  return weld_stl(facets, name, MeshFormat::kStlAscii);
}

}  // namespace

MeshFile read_obj(std::istream& in, const std::string& name) {
  MeshFile f;
  f.format = MeshFormat::kObj;
  f.path = name;
  std::vector<Vec3> pts;
  std::vector<Triangle> tris;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "v") {
      double c[3];
      if (tok.size() < 4 || !parse_double(tok[1], c[0]) || !parse_double(tok[2], c[1]) ||
          !parse_double(tok[3], c[2])) {
        parse_error(name, lineno, "malformed vertex");
      }
      pts.push_back({c[0], c[1], c[2]});
    } else if (tok[0] == "f") {
      if (tok.size() < 4) parse_error(name, lineno, "face needs at least three vertices");
      std::vector<int> poly;
      for (size_t i = 1; i < tok.size(); ++i) {
        const std::string_view ref = tok[i].substr(0, tok[i].find('/'));
        long idx = 0;
        const auto res = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (res.ec != std::errc() || res.ptr != ref.data() + ref.size() || idx == 0) {
          parse_error(name, lineno, "malformed face index '" + std::string(tok[i]) + "'");
        }
        const long v = idx > 0 ? idx - 1 : long(pts.size()) + idx;
        if (v < 0 || v >= long(pts.size())) {
          parse_error(name, lineno, "face references missing vertex " + std::to_string(idx));
        }
        poly.push_back(int(v));
      }
      for (size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  f.mesh = assemble(pts, std::move(tris), name, f.diagnostics);
  return f;
}

MeshFile read_stl(std::istream& in, const std::string& name) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() >= 84) {
    uint32_t n = 0;
    std::memcpy(&n, data.data() + 80, 4);
    if (data.size() == 84 + size_t(n) * 50) return read_stl_binary(data, name);
  }
  const size_t first = data.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || data.compare(first, 5, "solid") != 0) {
    parse_error(name, 1, "neither binary nor ASCII STL");
  }
  return read_stl_ascii(data, name);
}

MeshFile load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::string ext = lower_extension(path);
  if (ext == "stl") return read_stl(in, path);
  if (ext == "obj") return read_obj(in, path);
  throw Error(ErrorCode::kIo, path + ": unknown mesh format (expected .obj or .stl)");
}

void write_obj(const TriMesh& mesh, std::ostream& out) {
  std::vector<int> index(mesh.vertex_slots(), -1);
  int next = 1;
  char buf[96];
  for (int v : mesh.live_vertices()) {
    index[v] = next++;
    const Vec3& p = mesh.position(v);
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << buf;
  }
  for (int t : mesh.live_triangles()) {
    const Triangle& tri = mesh.triangle(t);
    out << "f " << index[tri[0]] << ' ' << index[tri[1]] << ' ' << index[tri[2]] << '\n';
  }
}

void write_stl(const TriMesh& mesh, std::ostream& out, bool binary) {
  const std::vector<int> tris = mesh.live_triangles();
  if (binary) {
    char header[80] = {};
    std::snprintf(header, sizeof header, "binary stl");
    out.write(header, 80);
    const uint32_t n = uint32_t(tris.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    for (int t : tris) {
      const Vec3 nrm = mesh.triangle_normal(t);
      float rec[12] = {float(nrm.x), float(nrm.y), float(nrm.z)};
      const auto p = mesh.triangle_points(t);
      for (int k = 0; k < 3; ++k) {
        rec[3 + 3 * k] = float(p[k].x);
        rec[4 + 3 * k] = float(p[k].y);
        rec[5 + 3 * k] = float(p[k].z);
      }
      out.write(reinterpret_cast<const char*>(rec), 48);
      const uint16_t attr = 0;
      out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    return;
  }
  char buf[128];
  out << "solid ambool\n";
  for (int t : tris) {
    const Vec3 n = mesh.triangle_normal(t);
    std::snprintf(buf, sizeof buf, "  facet normal %.9g %.9g %.9g\n    outer loop\n", n.x, n.y, n.z);
    out << buf;
    for (const Vec3& p : mesh.triangle_points(t)) {
      std::snprintf(buf, sizeof buf, "      vertex %.17g %.17g %.17g\n", p.x, p.y, p.z);
      out << buf;
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid ambool\n";
}

MeshFormat format_for_path(const std::string& path) {
  return lower_extension(path) == "stl" ? MeshFormat::kStlBinary : MeshFormat::kObj;
}

void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  if (format == MeshFormat::kObj) {
    write_obj(mesh, out);
  } else {
    write_stl(mesh, out, format == MeshFormat::kStlBinary);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace ambool
