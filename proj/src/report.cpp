#include "ambool/report.hpp"

#include <fstream>
#include <json.hpp>

#include "ambool/error.hpp"

namespace ambool {

std::string report_json(const BooleanReport& r, bool timings) {
  nlohmann::ordered_json j;
  j["outcome"] = r.outcome();
  j["operation"] = to_string(r.op);
  j["levels"] = r.levels;
  j["region_triangles"] = r.region_triangles;
  j["patches"] = r.patches;
  j["loops"] = r.loops;
  j["unpaired_loops"] = r.unpaired_loops;
  j["islands_removed"] = r.islands_removed;
  auto pairs = nlohmann::ordered_json::array();
  for (const LoopPairReport& p : r.pairings) {
    pairs.push_back({{"loop_a_size", p.loop_a_size},
                     {"loop_b_size", p.loop_b_size},
                     {"iterations", p.iterations},
                     {"seam_vertices", p.seam_vertices},
                     {"corner_triangles", p.corner_triangles},
                     {"strip_triangles", p.strip_triangles}});
  }
  j["pairings"] = pairs;
  if (r.seam) {
    j["seam"] = {{"edges", r.seam->edges},
                 {"mean", r.seam->mean},
                 {"stddev", r.seam->stddev},
                 {"max_distance_a", r.seam->max_distance_a},
                 {"max_distance_b", r.seam->max_distance_b}};
  } else {
    j["seam"] = nullptr;
  }
  j["target_edge_length"] = r.target_edge_length;
  j["seam_target_edge_length"] = r.seam_target_edge_length;
  j["triangles_added"] = r.triangles_added;
  j["triangles_deleted"] = r.triangles_deleted;
  j["simplify_collapses"] = r.simplify_collapses;
  j["warnings"] = r.warnings;
  j["failures"] = r.failures;
  if (timings) {
    j["timings"] = {{"overhead", r.timings.overhead},
                    {"intersection", r.timings.intersection},
                    {"zipper", r.timings.zipper}};
  }
  return j.dump(2) + "\n";
}

void save_report(const BooleanReport& report, const std::string& path, bool timings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << report_json(report, timings);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace ambool
