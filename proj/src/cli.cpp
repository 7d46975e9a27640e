#include "rayfield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rayfield/audit.hpp"
#include "rayfield/error.hpp"
#include "rayfield/lightfield.hpp"
#include "rayfield/pipelines.hpp"

namespace rayfield::cli {

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
}

int emit(const AuditReport& report, const std::string& report_path) {
  std::cout << report.to_json() << "\n";
  std::cerr << report.summary() << "\n";
  if (!report_path.empty()) write_text(report_path, report.to_json() + "\n");
  return report.pass ? kPass : kFail;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

struct GenArgs {
  int cams = 8;
  int res = 16;
  std::uint64_t seed = 7;
  std::string scene = "default";
  std::string out;
};

struct AuditArgs {
  std::string suite;
  std::string input;
  int trials = 100;
  std::uint64_t seed = 7;
  int rotations = 6;
  std::string report;
};

struct KernelArgs {
  std::string kernel = "all";
  int samples = 10000;
  std::uint64_t seed = 7;
  std::string report;
};

struct RenderArgs {
  std::string input;
  int res = 16;
  std::uint64_t seed = 7;
  std::string out;
};

struct SdfArgs {
  std::string input;
  int grid = 8;
  double extent = 0.8;
  std::uint64_t seed = 7;
  std::string out;
};

int do_gen(const GenArgs& a) {
  RigConfig rig;
  rig.width = rig.height = a.res;
  std::vector<Camera> cameras = make_camera_rig(rig);
  cameras.resize(static_cast<std::size_t>(a.cams));
  Rng rng(a.seed);
  const Scene scene = a.scene == "random" ? random_scene(rng, 3) : default_scene();
  const LightFieldSample sample{cameras, sample_scene(scene, cameras)};
  write_sample(sample, a.out);
  std::cerr << "wrote " << sample.field.size() << " rays from " << cameras.size() << " cameras to " << a.out << "\n";
  return kPass;
}

int do_audit(const AuditArgs& a) {
  AuditOptions options;
  options.trials = a.trials;
  options.seed = a.seed;
  options.rotations = a.rotations;
  if (!a.input.empty()) options.input = read_sample(a.input);
  return emit(run_audit(a.suite, options), a.report);
}

int do_render(const RenderArgs& a) {
  const LightFieldSample sample = a.input.empty() ? default_sample(16) : read_sample(a.input);
  const PipelineWeights weights = PipelineWeights::random(PipelineConfig{}, a.seed);
  const Camera camera = default_target_camera(a.res);
  const std::vector<RenderResult> pixels = render_view(sample.field, weights, camera);
  std::ostringstream image;
  image << "P6\n" << camera.width << " " << camera.height << "\n255\n";
  int empty = 0;
  for (const RenderResult& px : pixels) {
    for (int c = 0; c < 3; ++c) image.put(static_cast<char>(to_byte(px.rgb[c])));
    empty += px.no_contributors ? 1 : 0;
  }
  write_text(a.out, image.str());
  std::cerr << "wrote " << camera.width << "x" << camera.height << " image to " << a.out << " (" << empty
            << " pixels without contributors)\n";
  return kPass;
}

int do_sdf(const SdfArgs& a) {
  const LightFieldSample sample = a.input.empty() ? default_sample(16) : read_sample(a.input);
  const PipelineWeights weights = PipelineWeights::random(PipelineConfig{}, a.seed);
  std::vector<Vec3> points;
  const double step = a.grid > 1 ? 2.0 * a.extent / (a.grid - 1) : 0.0;
  for (int i = 0; i < a.grid; ++i)
    for (int j = 0; j < a.grid; ++j)
      for (int k = 0; k < a.grid; ++k)
        points.emplace_back(-a.extent + i * step, -a.extent + j * step, -a.extent + k * step);
  const std::vector<double> values = sdf_forward(sample.field, weights.sdf, weights.config.sdf, points);
  std::ostringstream csv;
  csv << std::setprecision(17) << "x,y,z,value\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    csv << points[i].x() << "," << points[i].y() << "," << points[i].z() << "," << values[i] << "\n";
  write_text(a.out, csv.str());
  std::cerr << "wrote " << points.size() << " values to " << a.out << "\n";
  return kPass;
}

int do_fit(std::uint64_t seed) {
  const FitDemoReport report = run_fit_demo(seed);
  std::cout << report.to_json() << "\n";
  std::cerr << report.summary() << "\n";
  return report.pass ? kPass : kFail;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Equivariant convolution and attention on ray space"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a synthetic scene with a camera rig");
  gen_cmd->add_option("--cams", gen.cams, "Number of rig cameras")->check(CLI::Range(1, 8));
  gen_cmd->add_option("--res", gen.res, "Pixels per side")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Seed for --scene random");
  gen_cmd->add_option("--scene", gen.scene, "default or random")->check(CLI::IsMember({"default", "random"}));
  gen_cmd->add_option("--out", gen.out, "Output sample file")->required();

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Run an equivariance suite");
  audit_cmd->add_option("--suite", audit.suite, "Suite name")->required()->check(CLI::IsMember(audit_suites()));
  audit_cmd->add_option("--input", audit.input, "Sample file (scalar radiance field)");
  audit_cmd->add_option("--trials", audit.trials, "Random group elements")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", audit.seed, "Root seed");
  audit_cmd->add_option("--rotations", audit.rotations, "Rotations for render-pixvar")->check(CLI::Range(2, 1000));
  audit_cmd->add_option("--report", audit.report, "Also write the JSON report here");

  KernelArgs kernel;
  auto* kernel_cmd = app.add_subcommand("kernel-check", "Verify kernel constraints on random samples");
  kernel_cmd->add_option("--kernel", kernel.kernel, "kappa1, kappa2, regular, ray2point or all")
      ->check(CLI::IsMember({"kappa1", "kappa2", "regular", "ray2point", "all"}));
  kernel_cmd->add_option("--samples", kernel.samples, "Samples per kernel")->check(CLI::PositiveNumber);
  kernel_cmd->add_option("--seed", kernel.seed, "Root seed");
  kernel_cmd->add_option("--report", kernel.report, "Also write the JSON report here");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render the target view to a PPM image");
  render_cmd->add_option("--input", render.input, "Sample file; default scene when omitted");
  render_cmd->add_option("--res", render.res, "Pixels per side")->check(CLI::PositiveNumber);
  render_cmd->add_option("--seed", render.seed, "Weight seed");
  render_cmd->add_option("--out", render.out, "Output image")->required();

  SdfArgs sdf;
  auto* sdf_cmd = app.add_subcommand("sdf", "Evaluate the SDF pipeline on a grid");
  sdf_cmd->add_option("--input", sdf.input, "Sample file; default scene when omitted");
  sdf_cmd->add_option("--grid", sdf.grid, "Points per axis")->check(CLI::PositiveNumber);
  sdf_cmd->add_option("--extent", sdf.extent, "Grid half width")->check(CLI::PositiveNumber);
  sdf_cmd->add_option("--seed", sdf.seed, "Weight seed");
  sdf_cmd->add_option("--out", sdf.out, "Output CSV")->required();

  std::uint64_t fit_seed = 7;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares profile fit demo");
  fit_cmd->add_option("--seed", fit_seed, "Root seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*gen_cmd) return do_gen(gen);
    if (*audit_cmd) return do_audit(audit);
    if (*kernel_cmd) return emit(run_kernel_check(kernel.kernel, kernel.samples, kernel.seed), kernel.report);
    if (*render_cmd) return do_render(render);
    if (*sdf_cmd) return do_sdf(sdf);
    if (*fit_cmd) return do_fit(fit_seed);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return e.code() == ErrorCode::kInternalConsistency ? kFail : kUsage;
  }
  return kUsage;
}

}  // namespace rayfield::cli
