#pragma once

#include <vector>

#include "rayfield/kernels.hpp"
#include "rayfield/representations.hpp"

namespace rayfield {

/// Feature blocks of possibly different types attached to one site.
using TypedFeature = std::vector<Feature>;

/// Channel mixing within one field type. Mixing between different types is
/// not equivariant and is rejected at construction.
class EquivariantLinear {
 public:
  struct Block {
    FieldType type_in;
    FieldType type_out;
    int source = 0;  // index of the input block
    CMat weights;    // out_channels x in_channels
  };

  EquivariantLinear() = default;

  /// Throws Error(kInvalidArgument) if a block maps between different types or
  /// carries complex weights on a point type.
  explicit EquivariantLinear(std::vector<Block> blocks);

  static EquivariantLinear identity(const TypedFeature& like);

  TypedFeature apply(const TypedFeature& input) const;
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::vector<Block> blocks_;
};

/// Single-block form: weights applied to a feature of the given type.
Feature equivariant_linear(const FieldType& type_in, const FieldType& type_out, const CMat& weights,
                           const Feature& feature);

/// Per-channel gate parameters; ignored for trivial types.
struct GateParams {
  Eigen::VectorXd scale;
  Eigen::VectorXd bias;
};

/// Trivial types (scalar ray irrep, l = 0, regular with omega1 = 0): tanh on
/// real and imaginary parts. Other types: z -> sigmoid(scale |z| + bias) z with
/// the norm taken per channel (over the three components for l = 1, per sample
/// for regular types).
Feature gated_nonlinearity(const Feature& feature, const GateParams& gate);

/// Whether values of this type are left unchanged by every twist.
bool is_trivial_type(const FieldType& type);

struct AttentionHeadSpec {
  int heads = 1;
  double temperature = 0.0;  // <= 0: sqrt of the key dimension per head
};

/// Keys and values for one (site, source ray) pair: single convolution terms
/// with the key and value kernels.
struct KeyValue {
  TypedFeature key;
  TypedFeature value;
};

/// Point site: one block per bank entry (scalar ray input, point outputs),
/// in bank order. Zero blocks when the ray misses the support.
KeyValue build_key_value(const KernelBank& key_bank, const KernelBank& value_bank, const Vec3& site,
                         const Ray& source, const Feature& source_value);

/// Ray site: one block per bank entry whose input type matches, irrep outputs.
KeyValue build_key_value(const KernelBank& key_bank, const KernelBank& value_bank, const Ray& site,
                         const Ray& source, const Feature& source_value);

struct PointAttentionLayer {
  KernelBank key_bank;
  KernelBank value_bank;
  EquivariantLinear query_map;
  AttentionHeadSpec heads;
};

struct PointAttentionResult {
  TypedFeature output;
  RMat weights;  // heads x neighbors
  std::vector<int> neighbors;
};

/// Softmax over rays passing within key_bank.support().d0 of p of
/// Re<query, key> / temperature per head; output is the weighted value sum.
/// Throws Error(kEmptyNeighborhood) when no ray is in range.
PointAttentionResult cross_attention_ray_to_point(const SampledRayField& field, const PointAttentionLayer& layer,
                                                  const Vec3& p, const TypedFeature& prior);

struct RegularAttentionLayer {
  KernelBank key_bank;    // type_in -> ray-regular(omega1)
  KernelBank value_bank;  // type_in -> ray-regular(omega1)
  CMat query_weights;     // key channels x prior channels
  AttentionHeadSpec heads;
};

struct RegularAttentionResult {
  AnchoredSamples output;
  RMat colors;                        // field channels x anchors, real radiance
  std::vector<bool> has_contributors;
  std::vector<RMat> weights;          // per anchor: heads x contributors
  std::vector<std::vector<int>> contributors;
};

/// Per-anchor cross-attention: each source ray contributes to the anchor its
/// regular kernel sample falls on. Colors apply the head-averaged weights to
/// the source radiance. Anchors without contributors keep the prior and get
/// zero color.
RegularAttentionResult cross_attention_ray_to_ray_regular(const SampledRayField& field,
                                                          const RegularAttentionLayer& layer, const Ray& query,
                                                          const AnchoredSamples& prior);

/// Sum of Gaussian bumps of a signed distance.
struct DistanceProfile {
  std::vector<double> centers;
  double sigma = 1.0;
  CVec coeffs;

  /// 5 centers uniform on [-extent, extent], sigma = extent / 2.
  static DistanceProfile uniform(double extent, CVec coeffs);
  Complex operator()(double delta) const;
};

struct SelfAttentionParams {
  DistanceProfile key_profile;
  DistanceProfile value_profile;
  Complex query_scale = 1.0;
  double temperature = 0.0;  // <= 0: sqrt of the channel count
};

struct SelfAttentionResult {
  AnchoredSamples output;
  RMat weights;  // anchors x anchors, rows sum to one
};

/// Scores Re<c_q f(x), c_k(t_y - t_x) f(y)>, values c_v(t_y - t_x) f(y).
SelfAttentionResult self_attention_along_ray(const AnchoredSamples& samples, const SelfAttentionParams& params);

/// Numerically stable softmax of a row vector.
Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& scores);

}  // namespace rayfield
