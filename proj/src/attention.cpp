#include "rayfield/attention.hpp"

#include <cmath>
#include <sstream>

#include "rayfield/conv.hpp"
#include "rayfield/error.hpp"

namespace rayfield {

namespace {

int head_width(int channels, int heads, const char* what) {
  if (heads < 1 || channels % heads != 0) {
    std::ostringstream os;
    os << what << " channels (" << channels << ") are not divisible by the head count (" << heads << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return channels / heads;
}

double typed_temperature(const TypedFeature& keys, const AttentionHeadSpec& spec) {
  if (spec.temperature > 0.0) return spec.temperature;
  double dim = 0.0;
  for (const Feature& k : keys) dim += static_cast<double>(head_width(k.channels(), spec.heads, "key")) * k.values.cols();
  return std::sqrt(std::max(dim, 1.0));
}

// Re<q, k> over the channels of one head, summed across blocks.
double head_score(const TypedFeature& query, const TypedFeature& key, int head, int heads) {
  double score = 0.0;
  for (std::size_t b = 0; b < key.size(); ++b) {
    const int width = key[b].channels() / heads;
    score += (query[b].values.middleRows(head * width, width).conjugate().cwiseProduct(
                  key[b].values.middleRows(head * width, width)))
                 .sum()
                 .real();
  }
  return score;
}

void check_query_matches(const TypedFeature& query, const TypedFeature& key) {
  if (query.size() != key.size()) throw Error(ErrorCode::kInvalidArgument, "query and key block counts differ");
  for (std::size_t b = 0; b < key.size(); ++b) {
    if (!(query[b].type == key[b].type) || query[b].channels() != key[b].channels()) {
      throw Error(ErrorCode::kInvalidArgument, "query block " + std::to_string(b) + " (" +
                                                   query[b].type.describe() + ") does not match key block (" +
                                                   key[b].type.describe() + ")");
    }
  }
}

Complex source_twist(const FieldType& type, const RigidMotion& to_frame, const Ray& y) {
  const RayIrrep& in = type.ray_irrep();
  if (in.omega1 == 0 && in.omega2 == 0.0) return 1.0;
  return irrep_so2r(in, twist_ray(to_frame, y));
}

Feature point_block(const KernelEntry& entry, const Ray& z, double d0, const CMat& f) {
  const std::vector<RMat> k = point_kernel_matrices(entry, z, d0);
  const Eigen::VectorXd real_f = f.real().col(0);
  RMat out(entry.out_channels, static_cast<Eigen::Index>(k.size()));
  for (std::size_t c = 0; c < k.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = k[c] * real_f;
  return Feature(entry.type_out, out.cast<Complex>());
}

TypedFeature point_blocks(const KernelBank& bank, const Ray& z, const Feature& source) {
  TypedFeature out;
  for (const KernelEntry& e : bank.entries()) {
    if (!(e.type_in == source.type) || !e.type_out.is_point()) {
      throw Error(ErrorCode::kMissingBankEntry, "point attention bank entry " + e.type_in.describe() + " -> " +
                                                    e.type_out.describe() + " does not take " +
                                                    source.type.describe());
    }
    out.push_back(point_block(e, z, bank.support().d0, source.values));
  }
  return out;
}

}  // namespace

EquivariantLinear::EquivariantLinear(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (const Block& b : blocks_) {
    if (!(b.type_in == b.type_out)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "equivariant linear maps cannot mix " + b.type_in.describe() + " into " + b.type_out.describe());
    }
    if (b.type_in.is_point() && b.weights.imag().cwiseAbs().maxCoeff() != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "point-type linear weights must be real");
    }
    if (b.source < 0) throw Error(ErrorCode::kInvalidArgument, "negative source block");
  }
}

EquivariantLinear EquivariantLinear::identity(const TypedFeature& like) {
  std::vector<Block> blocks;
  for (std::size_t b = 0; b < like.size(); ++b) {
    blocks.push_back({like[b].type, like[b].type, static_cast<int>(b),
                      CMat::Identity(like[b].channels(), like[b].channels())});
  }
  return EquivariantLinear(std::move(blocks));
}

TypedFeature EquivariantLinear::apply(const TypedFeature& input) const {
  TypedFeature out;
  out.reserve(blocks_.size());
  for (const Block& b : blocks_) {
    if (b.source >= static_cast<int>(input.size())) throw Error(ErrorCode::kInvalidArgument, "missing input block");
    out.push_back(equivariant_linear(b.type_in, b.type_out, b.weights, input[b.source]));
  }
  return out;
}

Feature equivariant_linear(const FieldType& type_in, const FieldType& type_out, const CMat& weights,
                           const Feature& feature) {
  if (!(type_in == type_out)) {
    throw Error(ErrorCode::kInvalidArgument,
                "equivariant linear maps cannot mix " + type_in.describe() + " into " + type_out.describe());
  }
  if (!(feature.type == type_in)) {
    throw Error(ErrorCode::kMixedFieldTypes, "linear map expects " + type_in.describe() + ", got " +
                                                 feature.type.describe());
  }
  if (weights.cols() != feature.channels()) throw Error(ErrorCode::kInvalidArgument, "linear weight shape mismatch");
  return Feature(type_out, weights * feature.values);
}

bool is_trivial_type(const FieldType& type) {
  if (type.is_ray_irrep()) return type.ray_irrep() == RayIrrep{};
  if (type.is_ray_regular()) return type.ray_regular().omega1 == 0;
  return type.point().l == 0;
}

Feature gated_nonlinearity(const Feature& feature, const GateParams& gate) {
  CMat out = feature.values;
  if (is_trivial_type(feature.type)) {
    out = feature.values.unaryExpr([](const Complex& z) { return Complex(std::tanh(z.real()), std::tanh(z.imag())); });
    return Feature(feature.type, out);
  }
  if (gate.scale.size() != feature.channels() || gate.bias.size() != feature.channels()) {
    throw Error(ErrorCode::kInvalidArgument, "gate parameters need one scale and bias per channel");
  }
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int c = 0; c < feature.channels(); ++c) {
    if (feature.type.is_point()) {
      const double norm = feature.values.row(c).norm();
      out.row(c) *= sigmoid(gate.scale[c] * norm + gate.bias[c]);
    } else {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        out(c, j) *= sigmoid(gate.scale[c] * std::abs(feature.values(c, j)) + gate.bias[c]);
      }
    }
  }
  return Feature(feature.type, out);
}

KeyValue build_key_value(const KernelBank& key_bank, const KernelBank& value_bank, const Vec3& site,
                         const Ray& source, const Feature& source_value) {
  const Ray z = Ray::unchecked(source.direction(), source.moment() - site.cross(source.direction()));
  return {point_blocks(key_bank, z, source_value), point_blocks(value_bank, z, source_value)};
}

KeyValue build_key_value(const KernelBank& key_bank, const KernelBank& value_bank, const Ray& site,
                         const Ray& source, const Feature& source_value) {
  const RigidMotion to_frame = invert(section_ray(site));
  const Ray z = apply_motion(to_frame, source);
  const Complex twist = source_twist(source_value.type, to_frame, source);
  auto blocks = [&](const KernelBank& bank) {
    TypedFeature out;
    for (const KernelEntry& e : bank.entries()) {
      if (!(e.type_in == source_value.type) || !e.type_out.is_ray_irrep()) continue;
      out.push_back(Feature(e.type_out, ray_kernel_matrix(e, z) * (twist * source_value.values)));
    }
    if (out.empty()) {
      throw Error(ErrorCode::kMissingBankEntry, "no ray kernel takes " + source_value.type.describe());
    }
    return out;
  };
  return {blocks(key_bank), blocks(value_bank)};
}

Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& scores) {
  const double top = scores.maxCoeff();
  Eigen::RowVectorXd e = (scores.array() - top).exp().matrix();
  return e / e.sum();
}

PointAttentionResult cross_attention_ray_to_point(const SampledRayField& field, const PointAttentionLayer& layer,
                                                  const Vec3& p, const TypedFeature& prior) {
  const double d0 = layer.key_bank.support().d0;
  PointAttentionResult result;
  for (int i = 0; i < field.size(); ++i) {
    const Ray& y = field.ray(i);
    if ((y.moment() - p.cross(y.direction())).norm() <= d0) result.neighbors.push_back(i);
  }
  if (result.neighbors.empty()) {
    std::ostringstream os;
    os << "no ray passes within " << d0 << " of the query point";
    throw Error(ErrorCode::kEmptyNeighborhood, os.str());
  }
  const TypedFeature query = layer.query_map.apply(prior);
  const int heads = layer.heads.heads;
  const int n = static_cast<int>(result.neighbors.size());
  std::vector<KeyValue> kv;
  kv.reserve(n);
  for (int i : result.neighbors) {
    kv.push_back(build_key_value(layer.key_bank, layer.value_bank, p, field.ray(i),
                                 Feature(field.type(), field.values(i))));
  }
  check_query_matches(query, kv.front().key);
  const double temperature = typed_temperature(kv.front().key, layer.heads);

  result.weights.resize(heads, n);
  for (int h = 0; h < heads; ++h) {
    Eigen::RowVectorXd scores(n);
    for (int j = 0; j < n; ++j) scores[j] = head_score(query, kv[j].key, h, heads) / temperature;
    result.weights.row(h) = softmax(scores);
  }
  for (std::size_t b = 0; b < kv.front().value.size(); ++b) {
    const Feature& like = kv.front().value[b];
    const int width = head_width(like.channels(), heads, "value");
    CMat out = CMat::Zero(like.channels(), like.values.cols());
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < like.channels(); ++c) out.row(c) += result.weights(c / width, j) * kv[j].value[b].values.row(c);
    }
    if (like.type.is_point()) out = out.real().cast<Complex>();
    result.output.push_back(Feature(like.type, out));
  }
  return result;
}

RegularAttentionResult cross_attention_ray_to_ray_regular(const SampledRayField& field,
                                                          const RegularAttentionLayer& layer, const Ray& query,
                                                          const AnchoredSamples& prior) {
  const KernelEntry& key_entry = layer.key_bank.find_regular(field.type(), prior.omega1());
  const KernelEntry& value_entry = layer.value_bank.find_regular(field.type(), prior.omega1());
  if (value_entry.out_channels != prior.channels()) {
    throw Error(ErrorCode::kInvalidArgument, "value channels must equal the prior channels");
  }
  if (layer.query_weights.rows() != key_entry.out_channels || layer.query_weights.cols() != prior.channels()) {
    throw Error(ErrorCode::kInvalidArgument, "query weights must be key channels x prior channels");
  }
  const int heads = layer.heads.heads;
  const int key_width = head_width(key_entry.out_channels, heads, "key");
  const int value_width = head_width(value_entry.out_channels, heads, "value");
  const double temperature = layer.heads.temperature > 0.0 ? layer.heads.temperature : std::sqrt(double(key_width));

  std::vector<double> params;
  for (const Vec3& a : prior.anchors()) params.push_back(param_of(query, a));
  const int n_anchors = prior.size();

  struct Contribution {
    int ray;
    CVec key;
    CVec value;
  };
  std::vector<std::vector<Contribution>> bins(n_anchors);
  const RigidMotion to_frame = invert(section_ray(query));
  for (int i : neighborhood(field, query, layer.key_bank.support())) {
    const Ray& y = field.ray(i);
    const Ray z = apply_motion(to_frame, y);
    const RegularKernelValue k = regular_kernel_matrix(key_entry, z);
    if (!k.nonzero) continue;
    const int bin = nearest_anchor(params, k.anchor_param);
    if (bin < 0) continue;
    const RegularKernelValue v = regular_kernel_matrix(value_entry, z);
    const CVec f = source_twist(field.type(), to_frame, y) * field.values(i).col(0);
    bins[bin].push_back({i, k.weights * f, v.weights * f});
  }

  CMat out = prior.values();
  RegularAttentionResult result{prior, RMat::Zero(field.channels(), n_anchors), std::vector<bool>(n_anchors, false),
                                std::vector<RMat>(n_anchors), std::vector<std::vector<int>>(n_anchors)};
  for (int a = 0; a < n_anchors; ++a) {
    const auto& contributions = bins[a];
    const int n = static_cast<int>(contributions.size());
    if (n == 0) continue;
    result.has_contributors[a] = true;
    const CVec q = layer.query_weights * prior.values().col(a);
    RMat weights(heads, n);
    for (int h = 0; h < heads; ++h) {
      Eigen::RowVectorXd scores(n);
      for (int j = 0; j < n; ++j) {
        scores[j] = q.segment(h * key_width, key_width).dot(contributions[j].key.segment(h * key_width, key_width)).real() /
                    temperature;
      }
      weights.row(h) = softmax(scores);
    }
    CVec column = CVec::Zero(value_entry.out_channels);
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < value_entry.out_channels; ++c) column[c] += weights(c / value_width, j) * contributions[j].value[c];
      const double mean_weight = weights.col(j).mean();
      result.colors.col(a) += mean_weight * field.values(contributions[j].ray).real().col(0);
      result.contributors[a].push_back(contributions[j].ray);
    }
    out.col(a) = column;
    result.weights[a] = std::move(weights);
  }
  result.output = AnchoredSamples(prior.ray(), prior.anchors(), prior.omega1(), out);
  return result;
}

DistanceProfile DistanceProfile::uniform(double extent, CVec coeffs) {
  if (!(extent > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance profile extent must be positive");
  if (coeffs.size() != 5) throw Error(ErrorCode::kInvalidArgument, "distance profile needs 5 coefficients");
  DistanceProfile p;
  for (int k = 0; k < 5; ++k) p.centers.push_back(-extent + extent * k / 2.0);
  p.sigma = extent / 2.0;
  p.coeffs = std::move(coeffs);
  return p;
}

Complex DistanceProfile::operator()(double delta) const {
  Complex sum = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double u = (delta - centers[k]) / sigma;
    sum += coeffs[static_cast<Eigen::Index>(k)] * std::exp(-0.5 * u * u);
  }
  return sum;
}

SelfAttentionResult self_attention_along_ray(const AnchoredSamples& samples, const SelfAttentionParams& params) {
  const int n = samples.size();
  const std::vector<double> t = samples.params();
  const CMat& f = samples.values();
  const double temperature = params.temperature > 0.0 ? params.temperature : std::sqrt(double(samples.channels()));
  // gram(x, y) = sum_c conj(f_c(x)) f_c(y)
  const CMat gram = f.adjoint() * f;
  RMat weights(n, n);
  for (int x = 0; x < n; ++x) {
    Eigen::RowVectorXd scores(n);
    for (int y = 0; y < n; ++y) {
      scores[y] = (std::conj(params.query_scale) * params.key_profile(t[y] - t[x]) * gram(x, y)).real() / temperature;
    }
    weights.row(x) = softmax(scores);
  }
  CMat out = CMat::Zero(samples.channels(), n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) out.col(x) += weights(x, y) * params.value_profile(t[y] - t[x]) * f.col(y);
  }
  return {AnchoredSamples(samples.ray(), samples.anchors(), samples.omega1(), out), weights};
}

}  // namespace rayfield
