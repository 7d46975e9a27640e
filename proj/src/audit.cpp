#include "rayfield/audit.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rayfield/attention.hpp"
#include "rayfield/conv.hpp"
#include "rayfield/error.hpp"
#include "rayfield/kernels.hpp"
#include "rayfield/pipelines.hpp"
#include "rayfield/random.hpp"

namespace rayfield {

namespace {

constexpr double kPi = std::numbers::pi;

// Relative difference of two complex arrays, 0 when both vanish.
double relative(const CMat& got, const CMat& want) {
  const double diff = (got - want).norm();
  const double scale = want.norm();
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

CMat random_values(Rng& rng, int rows, int cols, bool real_only) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(rng.uniform(-1, 1), real_only ? 0.0 : rng.uniform(-1, 1));
  return m;
}

SampledRayField random_field(Rng& rng, int n, const FieldType& type, int channels, double extent, bool real_only) {
  SampledRayField field(type, channels);
  for (int i = 0; i < n; ++i) field.push_back(random_ray(rng, extent), random_values(rng, channels, 1, real_only));
  return field;
}

SampledRayField scalar_field(const AuditOptions& options, Rng& rng, int n) {
  if (options.input) return options.input->field;
  return random_field(rng, n, RayIrrep{}, 3, 1.0, true);
}

KernelEntry random_entry(Rng& rng, const FieldType& in, const FieldType& out, int in_ch, int out_ch,
                         const RadialBasis& basis) {
  return KernelEntry::random(in, out, in_ch, out_ch, basis, rng);
}

RadialProfile random_profile(Rng& rng, const RadialBasis& basis, bool real_only) {
  RadialProfile p{basis, CVec(basis.size())};
  for (int k = 0; k < basis.size(); ++k) p.coeffs[k] = Complex(rng.uniform(-0.5, 0.5), real_only ? 0.0 : rng.uniform(-0.5, 0.5));
  return p;
}

RMat rotate_rows(const RMat& values, const Mat3& rotation) { return values * rotation.transpose(); }

Ray anchored_source(Rng& rng, const Vec3& through, const Vec3& avoid_direction) {
  for (;;) {
    const Vec3 d = random_unit_vector(rng);
    if (std::abs(d.dot(avoid_direction)) < 0.95) return ray_through(through, d);
  }
}

std::vector<Vec3> uniform_anchors(const Ray& ray, double t0, double spacing, int n) {
  std::vector<Vec3> out;
  for (int k = 0; k < n; ++k) out.push_back(point_at(ray, t0 + k * spacing));
  return out;
}

using Trial = std::function<double(Rng&)>;

struct Suite {
  double tolerance;
  std::function<Trial(const AuditOptions&)> prepare;  // shared setup, then per-trial body
};

Trial ray_action_suite(const AuditOptions&) {
  return [](Rng& rng) {
    const RigidMotion g1 = random_motion(rng, 3.0), g2 = random_motion(rng, 3.0);
    const Ray x = random_ray(rng, 2.0), y = random_ray(rng, 2.0);
    const Ray a = apply_motion(compose(g1, g2), x);
    const Ray b = apply_motion(g1, apply_motion(g2, x));
    double r = std::max((a.direction() - b.direction()).cwiseAbs().maxCoeff(), (a.moment() - b.moment()).cwiseAbs().maxCoeff());
    r = std::max(r, std::abs(ray_distance(apply_motion(g1, x), apply_motion(g1, y)) - ray_distance(x, y)));
    r = std::max(r, std::abs(ray_angle(apply_motion(g1, x), apply_motion(g1, y)) - ray_angle(x, y)));
    return r;
  };
}

Trial bundle_suite(const AuditOptions&) {
  return [](Rng& rng) {
    const RigidMotion g1 = random_motion(rng, 3.0), g2 = random_motion(rng, 3.0);
    const Ray x = random_ray(rng, 2.0);
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const StabilizerElement h = random_stabilizer(rng, 5.0);
    const Ray sx = apply_motion(section_ray(x), origin_ray());
    double r = std::max((sx.direction() - x.direction()).cwiseAbs().maxCoeff(), (sx.moment() - x.moment()).cwiseAbs().maxCoeff());
    r = std::max(r, (section_sphere(x.direction()) * Vec3::UnitZ() - x.direction()).cwiseAbs().maxCoeff());
    r = std::max(r, (apply_motion(section_point(p), Vec3::Zero()) - p).cwiseAbs().maxCoeff());
    const StabilizerElement lhs = twist_ray(compose(g1, g2), x);
    const StabilizerElement rhs = twist_ray(g1, apply_motion(g2, x)) * twist_ray(g2, x);
    r = std::max(r, stabilizer_residual(lhs, rhs));
    const Mat3 point_lhs = twist_point(compose(g1, g2), p);
    const Mat3 point_rhs = twist_point(g1, apply_motion(g2, p)) * twist_point(g2, p);
    r = std::max(r, (point_lhs - point_rhs).cwiseAbs().maxCoeff());
    r = std::max(r, stabilizer_residual(twist_ray(h.as_motion(), origin_ray()), h));
    return r;
  };
}

Trial conv_r2r_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'001);
  const FieldType in = options.input ? FieldType(RayIrrep{}) : FieldType(RayIrrep{1, 0.5});
  const int in_ch = options.input ? 3 : 2;
  auto field = std::make_shared<SampledRayField>(options.input ? options.input->field
                                                               : random_field(setup, 512, in, in_ch, 1.5, false));
  const FieldType out = RayIrrep{2, -0.3};
  auto bank = std::make_shared<KernelBank>(
      std::vector<KernelEntry>{random_entry(setup, in, out, in_ch, 2, RadialBasis::uniform(1.0, 2.0))},
      KernelSupport::make(1.0, 2.0));
  return [field, bank, out](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const SampledRayField moved = act_on_ray_field(g, *field);
    double worst = 0.0;
    for (int q = 0; q < 8; ++q) {
      const Ray x = random_ray(rng, 1.0);
      const Feature base = conv_ray_to_ray(*field, *bank, x, out);
      const Feature got = conv_ray_to_ray(moved, *bank, apply_motion(g, x), out);
      const Complex phase = irrep_so2r(out.ray_irrep(), twist_ray(g, x));
      worst = std::max(worst, relative(got.values, phase * base.values));
    }
    return worst;
  };
}

Trial conv_r2p_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'002);
  auto field = std::make_shared<SampledRayField>(scalar_field(options, setup, 512));
  const RadialBasis basis = RadialBasis::uniform(0.8);
  auto bank = std::make_shared<KernelBank>(
      std::vector<KernelEntry>{random_entry(setup, RayIrrep{}, PointIrrep{0}, 3, 2, basis),
                               random_entry(setup, RayIrrep{}, PointIrrep{1}, 3, 2, basis)},
      KernelSupport::make(0.8, kPi));
  return [field, bank](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const SampledRayField moved = act_on_ray_field(g, *field);
    double worst = 0.0;
    for (int q = 0; q < 8; ++q) {
      const Vec3 p(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      for (int l = 0; l <= 1; ++l) {
        const RMat base = conv_ray_to_point(*field, *bank, p, l).values.real();
        const RMat got = conv_ray_to_point(moved, *bank, apply_motion(g, p), l).values.real();
        const RMat want = l == 0 ? base : rotate_rows(base, g.rotation);
        worst = std::max(worst, relative(got.cast<Complex>(), want.cast<Complex>()));
      }
    }
    return worst;
  };
}

Trial conv_regular_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'003);
  auto field = std::make_shared<SampledRayField>(random_field(setup, 512, RayIrrep{}, 2, 1.0, false));
  auto bank = std::make_shared<KernelBank>(
      std::vector<KernelEntry>{random_entry(setup, RayIrrep{}, RayRegular{1, 16, -1.5, 1.5}, 2, 2,
                                            RadialBasis::uniform(0.5, kPi))},
      KernelSupport::make(0.5, kPi));
  return [field, bank](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const SampledRayField moved = act_on_ray_field(g, *field);
    const Ray x = random_ray(rng, 0.5);
    const std::vector<Vec3> anchors = uniform_anchors(x, -1.5, 0.2, 16);
    const AnchoredSamples base = conv_ray_to_ray_regular(*field, *bank, x, 1, anchors);
    const AnchoredSamples want = act_on_anchored_samples(g, base);
    const AnchoredSamples got = conv_ray_to_ray_regular(moved, *bank, want.ray(), 1, want.anchors());
    return relative(got.values(), want.values());
  };
}

Trial spherical_suite(const AuditOptions&) {
  return [](Rng& rng) {
    const int w_in = rng.uniform_int(0, 2), w_out = rng.uniform_int(0, 2);
    const FieldType in = RayIrrep{w_in, 0.0}, out = RayIrrep{w_out, 0.0};
    const KernelBank bank({KernelEntry::random(in, out, 2, 2, RadialBasis::uniform(0.5, 1.2), rng)},
                          KernelSupport::make(0.5, 1.2));
    const Vec3 center(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    SampledRayField field(in, 2);
    for (int i = 0; i < 200; ++i) field.push_back(ray_through(center, random_unit_vector(rng)), random_values(rng, 2, 1, false), 0);
    const Vec3 dq = random_unit_vector(rng);
    const CMat a = conv_ray_to_ray(field, bank, ray_through(center, dq), out).values;
    const CMat b = spherical_conv_intra_view(field, center, bank, dq, out).values;
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
  };
}

// Returns (DFT consistency relative residual, irrep/sample round-trip residual).
std::pair<double, double> fourier_trial(Rng& rng) {
  const int n = 8;
  const double spacing = 0.25, t0 = -1.0;
  const Ray x = random_ray(rng, 1.0);
  const std::vector<Vec3> anchors = uniform_anchors(x, t0, spacing, n);
  const std::vector<double> freqs = fourier_grid(n, spacing);
  const int w1 = rng.uniform_int(0, 2);

  SampledRayField field(RayIrrep{}, 2);
  for (const Vec3& a : anchors)
    for (int k = 0; k < 3; ++k) field.push_back(anchored_source(rng, a, x.direction()), random_values(rng, 2, 1, false));

  const RadialBasis basis = RadialBasis::uniform(1.0, kPi);
  const KernelEntry reg = KernelEntry::random(RayIrrep{}, RayRegular{w1, n, t0, t0 + n * spacing}, 2, 2, basis, rng);
  std::vector<KernelEntry> entries{reg};
  for (double w : freqs) {
    KernelEntry e = reg;
    e.type_out = RayIrrep{w1, w};
    entries.push_back(e);
  }
  const KernelBank bank(entries, KernelSupport{});
  const AnchoredSamples regular = conv_ray_to_ray_regular(field, bank, x, w1, anchors);
  const CMat coeffs = samples_to_irrep(regular, freqs) * static_cast<double>(n);
  double dft = 0.0;
  for (int j = 0; j < n; ++j) {
    const Feature irrep = conv_ray_to_ray(field, bank, x, RayIrrep{w1, freqs[j]});
    dft = std::max(dft, relative(coeffs.col(j), irrep.values));
  }

  const int m = 16;
  const Ray y = random_ray(rng, 2.0);
  const std::vector<Vec3> grid = uniform_anchors(y, rng.uniform(-2, 0), 0.2, m);
  const std::vector<double> grid_freqs = fourier_grid(m, 0.2);
  const CMat c = random_values(rng, 3, m, false);
  const CMat back = samples_to_irrep(irrep_to_samples(y, grid, 0, grid_freqs, c), grid_freqs);
  return {dft, (back - c).cwiseAbs().maxCoeff()};
}

Trial fourier_suite(const AuditOptions&) {
  return [](Rng& rng) {
    const auto [dft, round_trip] = fourier_trial(rng);
    return std::max(dft, round_trip);
  };
}

PointAttentionLayer random_point_layer(Rng& rng, double d0) {
  const RadialBasis basis = RadialBasis::uniform(d0);
  const KernelSupport support = KernelSupport::make(d0, kPi);
  PointAttentionLayer layer;
  layer.key_bank = KernelBank({KernelEntry::random(RayIrrep{}, PointIrrep{0}, 3, 4, basis, rng),
                               KernelEntry::random(RayIrrep{}, PointIrrep{1}, 3, 2, basis, rng)},
                              support);
  layer.value_bank = KernelBank({KernelEntry::random(RayIrrep{}, PointIrrep{0}, 3, 4, basis, rng),
                                 KernelEntry::random(RayIrrep{}, PointIrrep{1}, 3, 2, basis, rng)},
                                support);
  layer.query_map = EquivariantLinear({{PointIrrep{0}, PointIrrep{0}, 0, random_values(rng, 4, 4, true)},
                                       {PointIrrep{1}, PointIrrep{1}, 1, random_values(rng, 2, 2, true)}});
  layer.heads = {2, 0.0};
  return layer;
}

Trial attn_r2p_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'004);
  auto field = std::make_shared<SampledRayField>(scalar_field(options, setup, 512));
  auto layer = std::make_shared<PointAttentionLayer>(random_point_layer(setup, 0.6));
  return [field, layer](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const Vec3 p(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
    const RMat s = random_values(rng, 4, 1, true).real(), v = random_values(rng, 2, 3, true).real();
    const TypedFeature prior{Feature(PointIrrep{0}, s.cast<Complex>()), Feature(PointIrrep{1}, v.cast<Complex>())};
    const TypedFeature moved_prior{Feature(PointIrrep{0}, s.cast<Complex>()),
                                   Feature(PointIrrep{1}, rotate_rows(v, g.rotation).cast<Complex>())};
    const PointAttentionResult base = cross_attention_ray_to_point(*field, *layer, p, prior);
    const PointAttentionResult got =
        cross_attention_ray_to_point(act_on_ray_field(g, *field), *layer, apply_motion(g, p), moved_prior);
    if (got.neighbors != base.neighbors) return std::numeric_limits<double>::infinity();
    double r = (got.weights - base.weights).cwiseAbs().maxCoeff();
    r = std::max(r, relative(got.output[0].values, base.output[0].values));
    const RMat want = rotate_rows(base.output[1].values.real(), g.rotation);
    r = std::max(r, relative(got.output[1].values, want.cast<Complex>()));
    return r;
  };
}

RegularAttentionLayer random_regular_layer(Rng& rng, int omega1, int channels, double d0) {
  const RadialBasis basis = RadialBasis::uniform(d0, kPi);
  const KernelSupport support = KernelSupport::make(d0, kPi);
  const FieldType reg = RayRegular{omega1, 16, -1.5, 1.5};
  RegularAttentionLayer layer;
  layer.key_bank = KernelBank({KernelEntry::random(RayIrrep{}, reg, 3, 4, basis, rng)}, support);
  layer.value_bank = KernelBank({KernelEntry::random(RayIrrep{}, reg, 3, channels, basis, rng)}, support);
  layer.query_weights = random_values(rng, 4, channels, false);
  layer.heads = {2, 0.0};
  return layer;
}

// Rays through random points within 0.05 of the segment t in [-1.6, 1.6] of x.
SampledRayField field_near_ray(Rng& rng, const Ray& x, int n) {
  SampledRayField field(RayIrrep{}, 3);
  for (int i = 0; i < n; ++i) {
    const Vec3 offset(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05));
    const Vec3 through = point_at(x, rng.uniform(-1.6, 1.6)) + offset;
    field.push_back(anchored_source(rng, through, x.direction()), random_values(rng, 3, 1, true));
  }
  return field;
}

Trial attn_regular_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'005);
  auto conv_bank = std::make_shared<KernelBank>(
      std::vector<KernelEntry>{KernelEntry::random(RayIrrep{}, RayRegular{1, 16, -1.5, 1.5}, 3, 4,
                                                   RadialBasis::uniform(0.1, kPi), setup)},
      KernelSupport::make(0.1, kPi));
  auto layer = std::make_shared<RegularAttentionLayer>(random_regular_layer(setup, 1, 4, 0.1));
  return [conv_bank, layer](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const Ray x = random_ray(rng, 1.0);
    const SampledRayField field = field_near_ray(rng, x, 256);
    const std::vector<Vec3> anchors = uniform_anchors(x, -1.5, 0.2, 16);
    const AnchoredSamples prior = conv_ray_to_ray_regular(field, *conv_bank, x, 1, anchors);
    const RegularAttentionResult base = cross_attention_ray_to_ray_regular(field, *layer, x, prior);
    const AnchoredSamples moved_prior = act_on_anchored_samples(g, prior);
    const RegularAttentionResult got =
        cross_attention_ray_to_ray_regular(act_on_ray_field(g, field), *layer, moved_prior.ray(), moved_prior);
    if (got.contributors != base.contributors) return std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (std::size_t a = 0; a < base.weights.size(); ++a) {
      if (base.weights[a].size() > 0) r = std::max(r, (got.weights[a] - base.weights[a]).cwiseAbs().maxCoeff());
    }
    r = std::max(r, relative(got.output.values(), act_on_anchored_samples(g, base.output).values()));
    r = std::max(r, (got.colors - base.colors).cwiseAbs().maxCoeff());
    return r;
  };
}

Trial self_attn_suite(const AuditOptions&) {
  return [](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    const Ray x = random_ray(rng, 1.0);
    std::vector<Vec3> anchors;
    double t = -2.0;
    for (int k = 0; k < 16; ++k) {
      t += rng.uniform(0.05, 0.3);
      anchors.push_back(point_at(x, t));
    }
    const AnchoredSamples samples(x, anchors, 2, random_values(rng, 3, 16, false));
    SelfAttentionParams params;
    params.key_profile = DistanceProfile::uniform(3.0, random_values(rng, 5, 1, false).col(0));
    params.value_profile = DistanceProfile::uniform(3.0, random_values(rng, 5, 1, false).col(0));
    params.query_scale = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const SelfAttentionResult base = self_attention_along_ray(samples, params);
    const SelfAttentionResult got = self_attention_along_ray(act_on_anchored_samples(g, samples), params);
    double r = (got.weights - base.weights).cwiseAbs().maxCoeff();
    r = std::max(r, relative(got.output.values(), act_on_anchored_samples(g, base.output).values()));
    return r;
  };
}

Trial sdf_suite(const AuditOptions& options) {
  Rng setup = Rng(options.seed).split(1'000'006);
  auto field = std::make_shared<SampledRayField>(options.input ? options.input->field : default_sample(16).field);
  auto weights = std::make_shared<PipelineWeights>(PipelineWeights::random(PipelineConfig{}, options.seed));
  auto points = std::make_shared<std::vector<Vec3>>();
  for (int i = 0; i < 100; ++i) points->emplace_back(setup.uniform(-0.7, 0.7), setup.uniform(-0.7, 0.7), setup.uniform(-0.7, 0.7));
  auto base = std::make_shared<std::vector<double>>(sdf_forward(*field, weights->sdf, weights->config.sdf, *points));
  return [field, weights, points, base](Rng& rng) {
    const RigidMotion g = random_motion(rng, 2.0);
    std::vector<Vec3> moved_points;
    for (const Vec3& p : *points) moved_points.push_back(apply_motion(g, p));
    const std::vector<double> got = sdf_forward(act_on_ray_field(g, *field), weights->sdf, weights->config.sdf, moved_points);
    double r = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) r = std::max(r, std::abs(got[i] - (*base)[i]) / std::max(1.0, std::abs((*base)[i])));
    return r;
  };
}

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> table = {
      {"ray-action", {1e-10, ray_action_suite}},   {"bundle", {1e-10, bundle_suite}},
      {"conv-r2r", {1e-8, conv_r2r_suite}},        {"conv-r2p", {1e-8, conv_r2p_suite}},
      {"conv-regular", {1e-8, conv_regular_suite}}, {"spherical", {1e-10, spherical_suite}},
      {"fourier", {1e-8, fourier_suite}},          {"attn-r2p", {1e-10, attn_r2p_suite}},
      {"attn-regular", {1e-10, attn_regular_suite}}, {"self-attn", {1e-10, self_attn_suite}},
      {"sdf", {1e-6, sdf_suite}},
  };
  return table;
}

AuditReport finish(const std::string& suite, int trials, std::uint64_t seed, double tolerance,
                   const std::vector<double>& residuals, std::chrono::steady_clock::time_point start) {
  AuditReport report;
  report.suite = suite;
  report.trials = trials;
  report.seed = seed;
  report.tolerance = tolerance;
  double sum = 0.0;
  bool finite = true;
  for (double r : residuals) {
    report.max_residual = std::max(report.max_residual, r);
    sum += r;
    finite = finite && std::isfinite(r);
  }
  report.mean_residual = residuals.empty() ? 0.0 : sum / residuals.size();
  report.pass = finite && report.max_residual <= tolerance;
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<double> pixel_variances(const LightFieldSample& sample, const Camera& target, int rotations,
                                    std::uint64_t seed) {
  const PipelineWeights weights = PipelineWeights::random(PipelineConfig{}, seed);
  Rng root(seed);
  std::vector<std::vector<RenderResult>> renders;
  for (int k = 0; k < rotations; ++k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    const RigidMotion g{random_rotation(rng), Vec3::Zero()};
    const LightFieldSample moved = transform_sample(g, sample);
    renders.push_back(render_view(moved.field, weights, transform_camera(g, target)));
  }
  const std::size_t pixels = renders.front().size();
  std::vector<double> out;
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (const auto& r : renders) mean += 255.0 * r[i].rgb[c];
      mean /= rotations;
      double var = 0.0;
      for (const auto& r : renders) var += std::pow(255.0 * r[i].rgb[c] - mean, 2);
      out.push_back(var / rotations);
    }
  }
  return out;
}

}  // namespace

std::string AuditReport::to_json() const {
  const nlohmann::json j = {{"suite", suite},
                            {"trials", trials},
                            {"seed", seed},
                            {"tolerance", tolerance},
                            {"max_residual", max_residual},
                            {"mean_residual", mean_residual},
                            {"pass", pass},
                            {"wall_ms", wall_ms}};
  return j.dump();
}

std::string AuditReport::summary() const {
  std::ostringstream os;
  os << std::setprecision(3) << (pass ? "PASS " : "FAIL ") << suite << ": max residual " << max_residual
     << " (mean " << mean_residual << ", tolerance " << tolerance << ") over " << trials << " trials, seed " << seed;
  return os.str();
}

const std::vector<std::string>& audit_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, suite] : suites()) n.push_back(name);
    n.push_back("render-pixvar");
    return n;
  }();
  return names;
}

AuditReport run_audit(const std::string& suite, const AuditOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (options.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be positive");
  if (suite == "render-pixvar") {
    if (options.rotations < 2) throw Error(ErrorCode::kInvalidArgument, "pixel variance needs at least 2 rotations");
    const LightFieldSample sample = options.input ? *options.input : default_sample(16);
    const std::vector<double> variances =
        pixel_variances(sample, default_target_camera(16), options.rotations, options.seed);
    return finish(suite, options.rotations, options.seed, 1e-5, variances, start);
  }
  const auto it = suites().find(suite);
  if (it == suites().end()) throw Error(ErrorCode::kInvalidArgument, "unknown audit suite '" + suite + "'");
  const Trial trial = it->second.prepare(options);
  const Rng root(options.seed);
  std::vector<double> residuals(options.trials);
  parallel_for(options.trials, [&](int i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    residuals[i] = trial(rng);
  });
  return finish(suite, options.trials, options.seed, it->second.tolerance, residuals, start);
}

AuditReport run_kernel_check(const std::string& kernel, int samples, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(seed).split(2'000'000);
  const RadialBasis ray_basis = RadialBasis::uniform(2.0, kPi);
  const RadialBasis point_basis = RadialBasis::uniform(1.5);
  std::vector<std::pair<std::string, KernelUnderTest>> checks;
  {
    const RadialProfile p = random_profile(rng, ray_basis, false);
    checks.emplace_back("kappa1", RayKernelCheck{RayIrrep{1, 0.0}, RayIrrep{2, 0.0},
                                                 [p](const Ray& x) { return kappa1(1, 2, x, p); }});
  }
  {
    const RadialProfile p = random_profile(rng, ray_basis, false);
    checks.emplace_back("kappa2", RayKernelCheck{RayIrrep{0, 0.7}, RayIrrep{0, -1.3},
                                                 [p](const Ray& x) { return kappa2_irrep(0.7, -1.3, x, p); }});
  }
  {
    const RadialProfile p = random_profile(rng, ray_basis, false);
    checks.emplace_back("regular", RegularKernelCheck{RayIrrep{0, 0.7}, 0,
                                                      [p](const Ray& x) { return kappa2_regular(0.7, x, p); }});
  }
  {
    std::vector<RadialProfile> profiles;
    for (int c = 0; c < 3; ++c) profiles.push_back(random_profile(rng, point_basis, true));
    checks.emplace_back("ray2point", PointKernelCheck{1, [profiles](const Ray& x) {
                                                        return kappa_ray_to_point(1, x, profiles, 1.5);
                                                      }});
  }
  std::vector<double> residuals;
  bool matched = false;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    if (kernel != "all" && kernel != checks[k].first) continue;
    matched = true;
    residuals.push_back(verify_kernel_constraint(checks[k].second, samples, seed + k));
  }
  if (!matched) throw Error(ErrorCode::kInvalidArgument, "unknown kernel '" + kernel + "'");
  return finish("kernel-" + kernel, samples, seed, 1e-10, residuals, start);
}

LightFieldSample default_sample(int resolution) {
  RigConfig rig;
  rig.width = rig.height = resolution;
  LightFieldSample sample{make_camera_rig(rig), SampledRayField(RayIrrep{}, 3)};
  sample.field = sample_scene(default_scene(), sample.cameras);
  return sample;
}

Camera default_target_camera(int resolution) {
  return look_at(Vec3(2.6, -1.2, 1.4), Vec3(0.0, 0.0, 0.1), 0.9, resolution, resolution);
}

double render_pixel_variance(const Scene& scene, int source_resolution, int target_resolution, int rotations,
                             std::uint64_t seed) {
  RigConfig rig;
  rig.width = rig.height = source_resolution;
  LightFieldSample sample{make_camera_rig(rig), SampledRayField(RayIrrep{}, 3)};
  sample.field = sample_scene(scene, sample.cameras);
  const std::vector<double> v = pixel_variances(sample, default_target_camera(target_resolution), rotations, seed);
  return *std::max_element(v.begin(), v.end());
}

std::string FitDemoReport::to_json() const {
  const nlohmann::json j = {{"seed", seed},
                            {"columns", columns},
                            {"rank", rank},
                            {"recovery_error", recovery_error},
                            {"recovery_residual", recovery_residual},
                            {"model_rmse", model_rmse},
                            {"baseline_rmse", baseline_rmse},
                            {"pass", pass}};
  return j.dump();
}

std::string FitDemoReport::summary() const {
  std::ostringstream os;
  os << std::setprecision(3) << (pass ? "PASS " : "FAIL ") << "fit: recovery error " << recovery_error
     << ", residual " << recovery_residual << " (rank " << rank << "/" << columns << "); held-out rmse "
     << model_rmse << " vs constant-mean " << baseline_rmse;
  return os.str();
}

double smooth_target(const Vec3& p) { return std::exp(-2.0 * p.squaredNorm()) + 0.5 * p.z(); }

FitDemoReport run_fit_demo(std::uint64_t seed) {
  constexpr double kD0 = 0.3;
  const SampledRayField field = default_sample(16).field;
  const RadialBasis basis = RadialBasis::uniform(kD0);
  Rng rng = Rng(seed).split(3'000'000);
  auto draw_points = [&rng](int n) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
    return pts;
  };

  FitDemoReport report;
  report.seed = seed;

  // Generate and recover.
  const std::vector<Vec3> points = draw_points(300);
  Eigen::VectorXd truth(field.channels() * basis.size());
  for (Eigen::Index k = 0; k < truth.size(); ++k) truth[k] = rng.uniform(-0.5, 0.5);
  const KernelBank bank({profile_entry(field, basis, truth)}, KernelSupport::make(kD0, kPi));
  const SampledPointField generated = conv_ray_to_point(field, bank, points, 0);
  std::vector<double> targets;
  for (int i = 0; i < generated.size(); ++i) targets.push_back(generated.values(i)(0, 0));
  const ProfileFit recovered = fit_radial_profiles_ls(field, basis, kD0, points, targets);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  report.columns = static_cast<int>(truth.size());
  report.rank = recovered.rank;
  report.recovery_error = (recovered.coeffs - truth).norm() / truth.norm();
  report.recovery_residual = recovered.residual_norm / std::max(b.norm(), 1e-300);

  // Held-out comparison against the constant-mean predictor.
  const std::vector<Vec3> train = draw_points(400), test = draw_points(200);
  std::vector<double> train_targets, test_targets;
  for (const Vec3& p : train) train_targets.push_back(smooth_target(p));
  for (const Vec3& p : test) test_targets.push_back(smooth_target(p));
  const ProfileFit fit = fit_radial_profiles_ls(field, basis, kD0, train, train_targets);
  const Eigen::VectorXd predicted = conv_design_matrix(field, basis, kD0, test) * fit.coeffs;
  double mean = 0.0;
  for (double t : train_targets) mean += t;
  mean /= static_cast<double>(train_targets.size());
  double model_sq = 0.0, baseline_sq = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    model_sq += std::pow(predicted[static_cast<Eigen::Index>(i)] - test_targets[i], 2);
    baseline_sq += std::pow(mean - test_targets[i], 2);
  }
  report.model_rmse = std::sqrt(model_sq / static_cast<double>(test.size()));
  report.baseline_rmse = std::sqrt(baseline_sq / static_cast<double>(test.size()));

  const bool recovered_ok = report.recovery_residual <= 1e-8 &&
                            (recovered.rank_deficient || report.recovery_error <= 1e-8);
  report.pass = recovered_ok && report.model_rmse < report.baseline_rmse;
  return report;
}

}  // namespace rayfield
