#include "rayfield/pipelines.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rayfield/conv.hpp"
#include "rayfield/error.hpp"
#include "rayfield/random.hpp"

namespace rayfield {

namespace {

using nlohmann::json;

const FieldType kScalar3Type = RayIrrep{};

CMat random_matrix(Rng& rng, int rows, int cols, bool real_only) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(rng.uniform(-0.5, 0.5), real_only ? 0.0 : rng.uniform(-0.5, 0.5));
  return m;
}

Eigen::VectorXd random_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-0.5, 0.5);
  return v;
}

KernelBank point_bank(Rng& rng, const RadialBasis& basis, int scalar_channels, int vector_channels, double d0) {
  return KernelBank({KernelEntry::random(kScalar3Type, PointIrrep{0}, 3, scalar_channels, basis, rng),
                     KernelEntry::random(kScalar3Type, PointIrrep{1}, 3, vector_channels, basis, rng)},
                    KernelSupport::make(d0, std::numbers::pi));
}

FieldType regular_type(const RenderConfig& c) { return RayRegular{0, c.anchors, c.t_min, c.t_max}; }

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

json matrix_json(const CMat& m) {
  std::vector<double> re, im;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

CMat matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(re.size()) != rows * cols || im.size() != re.size()) {
    throw Error(ErrorCode::kParse, "matrix arrays have the wrong length");
  }
  CMat m(rows, cols);
  for (Eigen::Index r = 0, k = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, ++k) m(r, c) = Complex(re[k], im[k]);
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json bank_json(const KernelBank& bank) { return json::parse(bank.to_json()); }

KernelBank bank_from_json(const json& j) { return KernelBank::from_json(j.dump()); }

json linear_json(const EquivariantLinear& map) {
  json blocks = json::array();
  for (const auto& b : map.blocks()) {
    json j = {{"source", b.source}, {"weights", matrix_json(b.weights)}};
    if (b.type_in.is_point()) {
      j["l"] = b.type_in.point().l;
    } else {
      j["omega1"] = b.type_in.ray_irrep().omega1;
      j["omega2"] = b.type_in.ray_irrep().omega2;
    }
    blocks.push_back(std::move(j));
  }
  return blocks;
}

EquivariantLinear linear_from_json(const json& j) {
  std::vector<EquivariantLinear::Block> blocks;
  for (const json& b : j) {
    const FieldType type = b.contains("l") ? FieldType(PointIrrep{b.at("l").get<int>()})
                                           : FieldType(RayIrrep{b.at("omega1").get<int>(), b.at("omega2").get<double>()});
    blocks.push_back({type, type, b.at("source").get<int>(), matrix_from_json(b.at("weights"))});
  }
  return EquivariantLinear(std::move(blocks));
}

json profile_json(const DistanceProfile& p) {
  return {{"centers", p.centers}, {"sigma", p.sigma}, {"coeffs", matrix_json(p.coeffs)}};
}

DistanceProfile profile_from_json(const json& j) {
  DistanceProfile p;
  p.centers = j.at("centers").get<std::vector<double>>();
  p.sigma = j.at("sigma").get<double>();
  p.coeffs = matrix_from_json(j.at("coeffs")).col(0);
  return p;
}

TypedFeature point_prior(const SampledRayField& field, const KernelBank& bank, const Vec3& p) {
  return {conv_ray_to_point(field, bank, p, 0), conv_ray_to_point(field, bank, p, 1)};
}

}  // namespace

int sdf_readout_size(const SdfConfig& c) {
  return c.scalar_channels + c.vector_channels + c.vector_channels * (c.vector_channels - 1) / 2;
}

PipelineWeights PipelineWeights::random(const PipelineConfig& config, std::uint64_t seed) {
  PipelineWeights w;
  w.config = config;
  w.seed = seed;
  Rng rng(seed);

  const SdfConfig& s = config.sdf;
  const RadialBasis point_basis = RadialBasis::uniform(s.radius);
  w.sdf.conv_bank = point_bank(rng, point_basis, s.scalar_channels, s.vector_channels, s.radius);
  for (int b = 0; b < s.blocks; ++b) {
    SdfBlockWeights block;
    block.linear = EquivariantLinear(
        {{PointIrrep{0}, PointIrrep{0}, 0, random_matrix(rng, s.scalar_channels, s.scalar_channels, true)},
         {PointIrrep{1}, PointIrrep{1}, 1, random_matrix(rng, s.vector_channels, s.vector_channels, true)}});
    block.vector_gate = {random_vector(rng, s.vector_channels), random_vector(rng, s.vector_channels)};
    block.attention.key_bank = point_bank(rng, point_basis, s.key_scalar_channels, s.key_vector_channels, s.radius);
    block.attention.value_bank = point_bank(rng, point_basis, s.scalar_channels, s.vector_channels, s.radius);
    block.attention.query_map = EquivariantLinear(
        {{PointIrrep{0}, PointIrrep{0}, 0, random_matrix(rng, s.key_scalar_channels, s.scalar_channels, true)},
         {PointIrrep{1}, PointIrrep{1}, 1, random_matrix(rng, s.key_vector_channels, s.vector_channels, true)}});
    block.attention.heads = {s.heads, 0.0};
    w.sdf.blocks.push_back(std::move(block));
  }
  w.sdf.readout = random_vector(rng, sdf_readout_size(s));
  w.sdf.readout_bias = rng.uniform(-0.5, 0.5);

  const RenderConfig& r = config.render;
  const RadialBasis ray_basis = RadialBasis::uniform(r.radius, r.beta0);
  const KernelSupport support = KernelSupport::make(r.d0, r.beta0);
  const FieldType reg = regular_type(r);
  w.render.conv_bank = KernelBank({KernelEntry::random(kScalar3Type, reg, 3, r.channels, ray_basis, rng)}, support);
  w.render.attention.key_bank =
      KernelBank({KernelEntry::random(kScalar3Type, reg, 3, r.key_channels, ray_basis, rng)}, support);
  w.render.attention.value_bank =
      KernelBank({KernelEntry::random(kScalar3Type, reg, 3, r.channels, ray_basis, rng)}, support);
  w.render.attention.query_weights = random_matrix(rng, r.key_channels, r.channels, false);
  w.render.attention.heads = {r.heads, 0.0};
  const double extent = r.t_max - r.t_min;
  w.render.self_attention.key_profile = DistanceProfile::uniform(extent, random_matrix(rng, 5, 1, false).col(0));
  w.render.self_attention.value_profile = DistanceProfile::uniform(extent, random_matrix(rng, 5, 1, false).col(0));
  w.render.self_attention.query_scale = Complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
  w.render.density = random_vector(rng, r.channels);
  w.render.density_bias = rng.uniform(-0.5, 0.5);
  return w;
}

std::string PipelineWeights::to_json() const {
  const SdfConfig& s = config.sdf;
  const RenderConfig& r = config.render;
  json doc;
  doc["seed"] = seed;
  doc["config"] = {{"sdf",
                    {{"scalar_channels", s.scalar_channels},
                     {"vector_channels", s.vector_channels},
                     {"key_scalar_channels", s.key_scalar_channels},
                     {"key_vector_channels", s.key_vector_channels},
                     {"heads", s.heads},
                     {"blocks", s.blocks},
                     {"radius", s.radius}}},
                   {"render",
                    {{"channels", r.channels},
                     {"key_channels", r.key_channels},
                     {"heads", r.heads},
                     {"anchors", r.anchors},
                     {"t_min", r.t_min},
                     {"t_max", r.t_max},
                     {"d0", r.d0},
                     {"beta0", r.beta0},
                     {"radius", r.radius}}}};
  json blocks = json::array();
  for (const SdfBlockWeights& b : sdf.blocks) {
    blocks.push_back({{"linear", linear_json(b.linear)},
                      {"gate_scale", vector_json(b.vector_gate.scale)},
                      {"gate_bias", vector_json(b.vector_gate.bias)},
                      {"key_bank", bank_json(b.attention.key_bank)},
                      {"value_bank", bank_json(b.attention.value_bank)},
                      {"query_map", linear_json(b.attention.query_map)},
                      {"heads", b.attention.heads.heads},
                      {"temperature", b.attention.heads.temperature}});
  }
  doc["sdf"] = {{"conv_bank", bank_json(sdf.conv_bank)},
                {"blocks", blocks},
                {"readout", vector_json(sdf.readout)},
                {"readout_bias", sdf.readout_bias}};
  doc["render"] = {{"conv_bank", bank_json(render.conv_bank)},
                   {"key_bank", bank_json(render.attention.key_bank)},
                   {"value_bank", bank_json(render.attention.value_bank)},
                   {"query_weights", matrix_json(render.attention.query_weights)},
                   {"heads", render.attention.heads.heads},
                   {"temperature", render.attention.heads.temperature},
                   {"self_key_profile", profile_json(render.self_attention.key_profile)},
                   {"self_value_profile", profile_json(render.self_attention.value_profile)},
                   {"self_query_scale", {render.self_attention.query_scale.real(), render.self_attention.query_scale.imag()}},
                   {"self_temperature", render.self_attention.temperature},
                   {"density", vector_json(render.density)},
                   {"density_bias", render.density_bias}};
  return doc.dump(1);
}

PipelineWeights PipelineWeights::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("weights: ") + ex.what());
  }
  PipelineWeights w;
  std::string stage = "config";
  try {
    w.seed = doc.at("seed").get<std::uint64_t>();
    const json& cs = doc.at("config").at("sdf");
    SdfConfig& s = w.config.sdf;
    s.scalar_channels = cs.at("scalar_channels").get<int>();
    s.vector_channels = cs.at("vector_channels").get<int>();
    s.key_scalar_channels = cs.at("key_scalar_channels").get<int>();
    s.key_vector_channels = cs.at("key_vector_channels").get<int>();
    s.heads = cs.at("heads").get<int>();
    s.blocks = cs.at("blocks").get<int>();
    s.radius = cs.at("radius").get<double>();
    const json& cr = doc.at("config").at("render");
    RenderConfig& r = w.config.render;
    r.channels = cr.at("channels").get<int>();
    r.key_channels = cr.at("key_channels").get<int>();
    r.heads = cr.at("heads").get<int>();
    r.anchors = cr.at("anchors").get<int>();
    r.t_min = cr.at("t_min").get<double>();
    r.t_max = cr.at("t_max").get<double>();
    r.d0 = cr.at("d0").get<double>();
    r.beta0 = cr.at("beta0").get<double>();
    r.radius = cr.at("radius").get<double>();

    stage = "sdf";
    const json& js = doc.at("sdf");
    w.sdf.conv_bank = bank_from_json(js.at("conv_bank"));
    const json& blocks = js.at("blocks");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      stage = "sdf.blocks[" + std::to_string(b) + "]";
      const json& jb = blocks[b];
      SdfBlockWeights block;
      block.linear = linear_from_json(jb.at("linear"));
      block.vector_gate = {vector_from_json(jb.at("gate_scale")), vector_from_json(jb.at("gate_bias"))};
      block.attention.key_bank = bank_from_json(jb.at("key_bank"));
      block.attention.value_bank = bank_from_json(jb.at("value_bank"));
      block.attention.query_map = linear_from_json(jb.at("query_map"));
      block.attention.heads = {jb.at("heads").get<int>(), jb.at("temperature").get<double>()};
      w.sdf.blocks.push_back(std::move(block));
    }
    stage = "sdf.readout";
    w.sdf.readout = vector_from_json(js.at("readout"));
    w.sdf.readout_bias = js.at("readout_bias").get<double>();

    stage = "render";
    const json& jr = doc.at("render");
    w.render.conv_bank = bank_from_json(jr.at("conv_bank"));
    w.render.attention.key_bank = bank_from_json(jr.at("key_bank"));
    w.render.attention.value_bank = bank_from_json(jr.at("value_bank"));
    w.render.attention.query_weights = matrix_from_json(jr.at("query_weights"));
    w.render.attention.heads = {jr.at("heads").get<int>(), jr.at("temperature").get<double>()};
    w.render.self_attention.key_profile = profile_from_json(jr.at("self_key_profile"));
    w.render.self_attention.value_profile = profile_from_json(jr.at("self_value_profile"));
    const auto q = jr.at("self_query_scale").get<std::vector<double>>();
    if (q.size() != 2) throw Error(ErrorCode::kParse, "self_query_scale must hold two numbers");
    w.render.self_attention.query_scale = Complex(q[0], q[1]);
    w.render.self_attention.temperature = jr.at("self_temperature").get<double>();
    w.render.density = vector_from_json(jr.at("density"));
    w.render.density_bias = jr.at("density_bias").get<double>();
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, "weights " + stage + ": " + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kParse && std::string(ex.what()).rfind("weights", 0) == 0) throw;
    throw Error(ErrorCode::kParse, "weights " + stage + ": " + ex.what());
  }
  if (w.sdf.readout.size() != sdf_readout_size(w.config.sdf)) {
    throw Error(ErrorCode::kParse, "weights sdf.readout: wrong length for the configured channels");
  }
  if (w.render.density.size() != w.config.render.channels) {
    throw Error(ErrorCode::kParse, "weights render.density: wrong length for the configured channels");
  }
  return w;
}

std::vector<double> sdf_forward(const SampledRayField& field, const SdfWeights& weights, const SdfConfig& config,
                                const std::vector<Vec3>& points) {
  if (!(field.type() == kScalar3Type)) {
    throw Error(ErrorCode::kInvalidArgument, "sdf_forward needs a scalar input field");
  }
  if (weights.readout.size() != sdf_readout_size(config)) {
    throw Error(ErrorCode::kInvalidArgument, "sdf readout has the wrong length");
  }
  std::vector<double> out(points.size());
  parallel_for(static_cast<int>(points.size()), [&](int q) {
    const Vec3& p = points[q];
    TypedFeature feature = point_prior(field, weights.conv_bank, p);
    for (const SdfBlockWeights& block : weights.blocks) {
      TypedFeature mixed = block.linear.apply(feature);
      for (Feature& f : mixed) f = gated_nonlinearity(f, block.vector_gate);
      feature = cross_attention_ray_to_point(field, block.attention, p, mixed).output;
    }
    const RMat scalars = feature[0].values.real();
    const RMat vectors = feature[1].values.real();
    Eigen::VectorXd inputs(weights.readout.size());
    int k = 0;
    for (int c = 0; c < scalars.rows(); ++c) inputs[k++] = scalars(c, 0);
    for (int c = 0; c < vectors.rows(); ++c) inputs[k++] = vectors.row(c).norm();
    for (int a = 0; a < vectors.rows(); ++a)
      for (int b = a + 1; b < vectors.rows(); ++b) inputs[k++] = vectors.row(a).dot(vectors.row(b));
    out[q] = weights.readout.dot(inputs) + weights.readout_bias;
  });
  return out;
}

std::vector<Vec3> render_anchors(const Vec3& camera_center, const Vec3& direction, const RenderConfig& config) {
  const Vec3 d = direction.normalized();
  const double step = (config.t_max - config.t_min) / config.anchors;
  std::vector<Vec3> anchors;
  for (int k = 0; k < config.anchors; ++k) anchors.push_back(camera_center + (config.t_min + k * step) * d);
  return anchors;
}

Vec3 volumetric_composite(const RMat& colors, const std::vector<double>& densities, const std::vector<double>& params,
                          double window_end) {
  const int n = static_cast<int>(params.size());
  if (colors.rows() != 3 || colors.cols() != n || static_cast<int>(densities.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "compositing needs 3 x N colors and N densities");
  }
  for (int i = 0; i < n; ++i) {
    const double next = i + 1 < n ? params[i + 1] : window_end;
    if (!(next > params[i])) throw Error(ErrorCode::kNonMonotone, "compositing parameters must increase strictly");
    if (!(densities[i] >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "densities must be nonnegative");
  }
  Vec3 out = Vec3::Zero();
  double optical_depth = 0.0;
  for (int i = 0; i < n; ++i) {
    const double delta = (i + 1 < n ? params[i + 1] : window_end) - params[i];
    const double transmittance = std::exp(-optical_depth);
    out += transmittance * (-std::expm1(-densities[i] * delta)) * colors.col(i);
    optical_depth += densities[i] * delta;
  }
  return out;
}

RenderResult render_ray(const SampledRayField& field, const RenderWeights& weights, const Ray& target,
                        const std::vector<Vec3>& anchors, double window_end) {
  const AnchoredSamples prior = conv_ray_to_ray_regular(field, weights.conv_bank, target, 0, anchors);
  const RegularAttentionResult cross = cross_attention_ray_to_ray_regular(field, weights.attention, target, prior);
  RenderResult result;
  if (std::none_of(cross.has_contributors.begin(), cross.has_contributors.end(), [](bool b) { return b; })) {
    result.no_contributors = true;
    return result;
  }
  const SelfAttentionResult self = self_attention_along_ray(cross.output, weights.self_attention);
  const int n = self.output.size();
  std::vector<double> densities(n);
  for (int a = 0; a < n; ++a) {
    densities[a] = softplus(weights.density.dot(self.output.values().col(a).cwiseAbs()) + weights.density_bias);
  }
  result.rgb = volumetric_composite(cross.colors, densities, prior.params(), window_end);
  return result;
}

std::vector<RenderResult> render_view(const SampledRayField& field, const PipelineWeights& weights,
                                      const Camera& camera) {
  camera.validate();
  std::vector<RenderResult> out(static_cast<std::size_t>(camera.width) * camera.height);
  parallel_for(static_cast<int>(out.size()), [&](int i) {
    const Ray target = camera.pixel_ray(i % camera.width, i / camera.width);
    const std::vector<Vec3> anchors = render_anchors(camera.center, target.direction(), weights.config.render);
    const double window_end = param_of(target, camera.center + weights.config.render.t_max * target.direction());
    out[i] = render_ray(field, weights.render, target, anchors, window_end);
  });
  return out;
}

RMat conv_design_matrix(const SampledRayField& field, const RadialBasis& basis, double d0,
                        const std::vector<Vec3>& points) {
  if (!(field.type() == kScalar3Type)) throw Error(ErrorCode::kInvalidArgument, "profile fits need a scalar field");
  basis.validate();
  const int nb = basis.size();
  const int channels = field.channels();
  RMat design = RMat::Zero(static_cast<Eigen::Index>(points.size()), channels * nb);
  parallel_for(static_cast<int>(points.size()), [&](int q) {
    const Vec3& p = points[q];
    for (int i = 0; i < field.size(); ++i) {
      const Ray& y = field.ray(i);
      const double r = (y.moment() - p.cross(y.direction())).norm();
      if (r > d0) continue;
      const Eigen::VectorXd phi = basis.evaluate(r, 0.0);
      for (int c = 0; c < channels; ++c) {
        design.row(q).segment(c * nb, nb) += field.values(i)(c, 0).real() * phi.transpose();
      }
    }
  });
  return design;
}

ProfileFit fit_radial_profiles_ls(const SampledRayField& field, const RadialBasis& basis, double d0,
                                  const std::vector<Vec3>& points, const std::vector<double>& targets) {
  if (points.size() != targets.size()) throw Error(ErrorCode::kInvalidArgument, "one target per point is required");
  const RMat design = conv_design_matrix(field, basis, d0, points);
  if (design.rows() < design.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least as many targets as coefficients");
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(design);
  ProfileFit fit;
  fit.coeffs = cod.solve(b);
  fit.residual_norm = (design * fit.coeffs - b).norm();
  fit.rank = static_cast<int>(cod.rank());
  fit.rank_deficient = fit.rank < design.cols();
  return fit;
}

KernelEntry profile_entry(const SampledRayField& field, const RadialBasis& basis, const Eigen::VectorXd& coeffs) {
  const int nb = basis.size();
  if (coeffs.size() != field.channels() * nb) throw Error(ErrorCode::kInvalidArgument, "coefficient count mismatch");
  CMat matrix(field.channels(), nb);
  for (int c = 0; c < field.channels(); ++c) matrix.row(c) = coeffs.segment(c * nb, nb).cast<Complex>().transpose();
  KernelEntry entry{field.type(), PointIrrep{0}, field.channels(), 1, 1, basis, matrix};
  entry.validate();
  return entry;
}

}  // namespace rayfield
