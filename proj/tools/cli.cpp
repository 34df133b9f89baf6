#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ambool/boolean.hpp"
#include "ambool/error.hpp"
#include "ambool/mesh_io.hpp"
#include "ambool/report.hpp"

namespace ambool {

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Boolean operations on triangle meshes"};
  app.name("ambool");
  std::string op_name, path_a, path_b, output, report_path, format;
  double tolerance = 0.0, target_edge = 0.0, seam_resolution = 1.0, sharp_deg = 30.0;
  int max_refine = 5, rays = 11;
  uint64_t seed = 0;
  bool precise = false, approximate = false, preserve_sharp = false, simplify = false, timings = false;

  app.add_option("operation", op_name, "union, intersect or subtract")
      ->required()
      ->check(CLI::IsMember({"union", "intersect", "subtract"}));
  app.add_option("A", path_a, "first mesh (.obj or .stl)")->required();
  app.add_option("B", path_b, "second mesh (.obj or .stl)")->required();
  app.add_option("-o,--output", output, "result mesh")->required();
  app.add_option("--tolerance", tolerance, "intersection tolerance")->check(CLI::NonNegativeNumber);
  auto* p_flag = app.add_flag("--precise", precise, "reproject seams onto the inputs (default)");
  auto* a_flag = app.add_flag("--approximate", approximate, "skip reprojection");
  p_flag->excludes(a_flag);
  app.add_option("--target-edge-length", target_edge, "edge length in the intersection region")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seam-resolution", seam_resolution, "seam edge length multiplier")->check(CLI::PositiveNumber);
  app.add_flag("--preserve-sharp", preserve_sharp, "keep creases");
  app.add_option("--sharp-angle", sharp_deg, "crease threshold in degrees")->check(CLI::Range(0.0, 180.0));
  app.add_option("--max-refine", max_refine, "refinement retries")->check(CLI::PositiveNumber);
  app.add_option("--rays", rays, "containment rays (odd)")->check(CLI::PositiveNumber);
  app.add_flag("--simplify", simplify, "simplify the seam region afterwards");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--report", report_path, "JSON report path");
  app.add_flag("--timings", timings, "include stage timings in the report");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"obj", "stl"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  BooleanParams params;
  params.op = op_name == "union" ? BooleanOp::kUnion : op_name == "intersect" ? BooleanOp::kIntersection
                                                                              : BooleanOp::kDifference;
  params.tolerance = tolerance;
  params.precision = approximate ? Precision::kApproximate : Precision::kPrecise;
  params.target_edge_length = target_edge;
  params.seam_resolution = seam_resolution;
  params.preserve_sharp = preserve_sharp;
  params.sharp_angle = sharp_deg * kPi / 180.0;
  params.max_refine_iterations = max_refine;
  params.rays = rays;
  params.post_simplify = simplify;
  params.seed = seed;

  const MeshFormat out_format = format.empty() ? format_for_path(output)
                                : format == "stl" ? MeshFormat::kStlBinary
                                                  : MeshFormat::kObj;
  BooleanResult result;
  try {
    params.check();
    const MeshFile a = load_mesh(path_a);
    const MeshFile b = load_mesh(path_b);
    result = boolean_op(a.mesh, b.mesh, params);
    if (!report_path.empty()) save_report(result.report, report_path, timings);
    if (result.mesh) save_mesh(*result.mesh, output, out_format);
  } catch (const Error& e) {
    std::cerr << "ambool: " << e.what() << "\n";
    return 1;
  }
  if (!result.mesh) {
    std::cerr << "ambool: " << result.report.outcome();
    if (!result.report.failures.empty()) std::cerr << " (" << result.report.failures.back() << ")";
    std::cerr << "\n";
    return 2;
  }
  std::cout << op_name << ": " << result.mesh->triangle_count() << " triangles, " << result.report.levels
            << " refinement levels\n";
  return 0;
}

}  // namespace ambool
