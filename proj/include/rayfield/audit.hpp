#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rayfield/lightfield.hpp"

namespace rayfield {

struct AuditReport {
  std::string suite;
  int trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  bool pass = false;
  double wall_ms = 0.0;

  std::string to_json() const;
  std::string summary() const;
};

struct AuditOptions {
  int trials = 100;
  std::uint64_t seed = 7;
  int rotations = 6;
  std::optional<LightFieldSample> input;  // scalar3 sample; suites fall back to synthetic data
};

/// Names accepted by run_audit.
const std::vector<std::string>& audit_suites();

/// Runs one equivariance suite. Throws Error(kInvalidArgument) for an unknown name.
AuditReport run_audit(const std::string& suite, const AuditOptions& options);

/// Kernel names accepted by run_kernel_check: kappa1, kappa2, regular, ray2point, all.
AuditReport run_kernel_check(const std::string& kernel, int samples, std::uint64_t seed);

/// Default rig (8 cameras, given resolution) sampling the default scene.
LightFieldSample default_sample(int resolution);

/// Novel target camera used by render demos and the pixel-variance suite.
Camera default_target_camera(int resolution);

/// Per-pixel, per-channel variance (0-255 scale) across renders of the same
/// view under `rotations` random global rotations. Returns the maximum.
double render_pixel_variance(const Scene& scene, int source_resolution, int target_resolution, int rotations,
                             std::uint64_t seed);

/// Least-squares demo on the default sample. Recovery: targets generated by a
/// known profile are fitted back. Baseline: a smooth field fitted on training
/// points and scored against the constant-mean predictor on held-out points.
struct FitDemoReport {
  std::uint64_t seed = 0;
  int columns = 0;
  int rank = 0;
  double recovery_error = 0.0;     // relative coefficient error
  double recovery_residual = 0.0;  // relative prediction residual
  double model_rmse = 0.0;
  double baseline_rmse = 0.0;
  bool pass = false;

  std::string to_json() const;
  std::string summary() const;
};

/// Smooth target used by the baseline comparison.
double smooth_target(const Vec3& p);

FitDemoReport run_fit_demo(std::uint64_t seed);

}  // namespace rayfield
