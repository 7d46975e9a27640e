#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rayfield/attention.hpp"
#include "rayfield/kernels.hpp"
#include "rayfield/lightfield.hpp"
#include "rayfield/representations.hpp"

namespace rayfield {

struct SdfConfig {
  int scalar_channels = 4;  // l = 0 channels carried between blocks
  int vector_channels = 2;  // l = 1 channels carried between blocks
  int key_scalar_channels = 4;
  int key_vector_channels = 2;
  int heads = 2;
  int blocks = 3;
  double radius = 0.5;  // radial basis extent and neighborhood cutoff
};

struct RenderConfig {
  int channels = 4;
  int key_channels = 4;
  int heads = 2;
  int anchors = 32;
  double t_min = 2.0;  // depth window along the target ray, from its camera center
  double t_max = 5.5;
  double d0 = 0.08;     // ray-to-ray support
  double beta0 = 3.141592653589793;
  double radius = 0.08;  // radial basis extent
};

struct PipelineConfig {
  SdfConfig sdf;
  RenderConfig render;
};

struct SdfBlockWeights {
  EquivariantLinear linear;
  GateParams vector_gate;
  PointAttentionLayer attention;
};

struct SdfWeights {
  KernelBank conv_bank;  // scalar3 -> l = 0 and l = 1
  std::vector<SdfBlockWeights> blocks;
  Eigen::VectorXd readout;  // over scalars, vector norms, vector pair dots
  double readout_bias = 0.0;
};

struct RenderWeights {
  KernelBank conv_bank;  // scalar3 -> ray-regular(0)
  RegularAttentionLayer attention;
  SelfAttentionParams self_attention;
  Eigen::VectorXd density;  // over channel magnitudes
  double density_bias = 0.0;
};

struct PipelineWeights {
  PipelineConfig config;
  std::uint64_t seed = 0;
  SdfWeights sdf;
  RenderWeights render;

  /// Every coefficient uniform on [-0.5, 0.5] from the given seed.
  static PipelineWeights random(const PipelineConfig& config, std::uint64_t seed);

  std::string to_json() const;
  /// Throws Error(kParse) naming the offending stage.
  static PipelineWeights from_json(const std::string& text);
};

/// Invariant SDF value per point. Throws Error(kEmptyNeighborhood) for a
/// point no ray passes near.
std::vector<double> sdf_forward(const SampledRayField& field, const SdfWeights& weights, const SdfConfig& config,
                                const std::vector<Vec3>& points);

/// Number of invariant readout inputs for the given channel counts.
int sdf_readout_size(const SdfConfig& config);

/// Anchors center + t d for t = t_min + k (t_max - t_min) / N, k < N.
std::vector<Vec3> render_anchors(const Vec3& camera_center, const Vec3& direction, const RenderConfig& config);

struct RenderResult {
  Vec3 rgb = Vec3::Zero();
  bool no_contributors = false;
};

/// Regular convolution, per-anchor cross-attention (colors from weights on
/// radiance), self-attention along the ray, softplus density and compositing.
/// `window_end` is the ray parameter closing the last compositing interval.
RenderResult render_ray(const SampledRayField& field, const RenderWeights& weights, const Ray& target,
                        const std::vector<Vec3>& anchors, double window_end);

/// Renders every pixel of a camera (row-major) with render_anchors.
std::vector<RenderResult> render_view(const SampledRayField& field, const PipelineWeights& weights,
                                      const Camera& camera);

/// Front-to-back compositing. colors is 3 x N. Throws Error(kNonMonotone)
/// unless params increase strictly and window_end exceeds the last one.
Vec3 volumetric_composite(const RMat& colors, const std::vector<double>& densities, const std::vector<double>& params,
                          double window_end);

/// Linear model value(p) = sum over (channel, basis) of c * conv feature.
struct ProfileFit {
  Eigen::VectorXd coeffs;  // in_channels x basis, channel-major
  double residual_norm = 0.0;
  int rank = 0;
  bool rank_deficient = false;
};

/// Design matrix of ray-to-point conv features: one row per point, one column
/// per (input channel, basis function). Rays farther than d0 are ignored.
RMat conv_design_matrix(const SampledRayField& field, const RadialBasis& basis, double d0,
                        const std::vector<Vec3>& points);

/// Minimum-norm least squares for the l = 0 ray-to-point profile.
ProfileFit fit_radial_profiles_ls(const SampledRayField& field, const RadialBasis& basis, double d0,
                                  const std::vector<Vec3>& points, const std::vector<double>& targets);

/// The fitted coefficients as a one-output kernel entry usable by conv_ray_to_point.
KernelEntry profile_entry(const SampledRayField& field, const RadialBasis& basis, const Eigen::VectorXd& coeffs);

}  // namespace rayfield
