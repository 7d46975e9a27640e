#include <gtest/gtest.h>

#include <numbers>

#include "rayfield/conv.hpp"
#include "rayfield/error.hpp"
#include "rayfield/pipelines.hpp"
#include "rayfield/random.hpp"

using namespace rayfield;

namespace {

SampledRayField small_scene_field() {
  RigConfig rig;
  rig.width = rig.height = 12;
  return sample_scene(default_scene(), make_camera_rig(rig));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternalConsistency;
}

}  // namespace

TEST(Composite, ClosedFormTwoSamples) {
  RMat colors(3, 2);
  colors << 1, 0, 0, 1, 0, 0;
  const Vec3 c = volumetric_composite(colors, {1.0, 1.0}, {0.0, 1.0}, 2.0);
  const double e = std::exp(-1.0);
  EXPECT_LE((c - Vec3((1 - e), e * (1 - e), 0)).norm(), 1e-15);
}

TEST(Composite, TransparentAndOpaque) {
  RMat colors = RMat::Random(3, 4).cwiseAbs();
  const std::vector<double> params{0.0, 0.5, 1.0, 1.5};
  EXPECT_EQ(volumetric_composite(colors, {0, 0, 0, 0}, params, 2.0), Vec3::Zero());
  EXPECT_LE((volumetric_composite(colors, {1e6, 1, 1, 1}, params, 2.0) - Vec3(colors.col(0))).norm(), 1e-15);
  EXPECT_EQ(code_of([&] { volumetric_composite(colors, {1, 1, 1, 1}, {0.0, 0.5, 0.5, 1.0}, 2.0); }),
            ErrorCode::kNonMonotone);
  EXPECT_EQ(code_of([&] { volumetric_composite(colors, {1, 1, 1, 1}, params, 1.5); }), ErrorCode::kNonMonotone);
}

TEST(RenderAnchors, Layout) {
  RenderConfig cfg;
  cfg.anchors = 4;
  cfg.t_min = 1.0;
  cfg.t_max = 3.0;
  const std::vector<Vec3> a = render_anchors(Vec3(1, 0, 0), Vec3(0, 1, 0), cfg);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_LE((a[0] - Vec3(1, 1, 0)).norm(), 1e-15);
  EXPECT_LE((a[3] - Vec3(1, 2.5, 0)).norm(), 1e-15);
}

TEST(PipelineWeights, JsonRoundTripIsExact) {
  const PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 11);
  const std::string text = w.to_json();
  EXPECT_EQ(PipelineWeights::from_json(text).to_json(), text);
  EXPECT_EQ(PipelineWeights::random(PipelineConfig{}, 11).to_json(), text);
  EXPECT_NE(PipelineWeights::random(PipelineConfig{}, 12).to_json(), text);
  EXPECT_EQ(code_of([] { PipelineWeights::from_json(R"({"seed": 1})"); }), ErrorCode::kParse);
}

TEST(SdfForward, ZeroReadoutGivesZero) {
  PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 3);
  w.sdf.readout.setZero();
  w.sdf.readout_bias = 0.0;
  const std::vector<double> v = sdf_forward(small_scene_field(), w.sdf, w.config.sdf, {Vec3::Zero(), Vec3(0.2, 0.1, 0)});
  EXPECT_EQ(v, (std::vector<double>{0.0, 0.0}));
}

TEST(SdfForward, EmptyNeighborhoodIsReported) {
  const PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 3);
  EXPECT_EQ(code_of([&] { sdf_forward(small_scene_field(), w.sdf, w.config.sdf, {Vec3(50, 50, 50)}); }),
            ErrorCode::kEmptyNeighborhood);
}

TEST(SdfForward, Equivariant) {
  Rng rng(91);
  const PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 5);
  const SampledRayField f = small_scene_field();
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
  const std::vector<double> base = sdf_forward(f, w.sdf, w.config.sdf, pts);
  for (int trial = 0; trial < 3; ++trial) {
    const RigidMotion g = random_motion(rng, 2.0);
    std::vector<Vec3> moved;
    for (const Vec3& p : pts) moved.push_back(apply_motion(g, p));
    const std::vector<double> got = sdf_forward(act_on_ray_field(g, f), w.sdf, w.config.sdf, moved);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(got[i], base[i], 1e-6);
  }
}

TEST(RenderRay, ConstantRadianceSceneReturnsRadiance) {
  Rng rng(92);
  PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 7);
  w.render.density.setZero();
  w.render.density_bias = 50.0;  // opaque
  const Ray target = ray_through(Vec3(0, 0, -3), Vec3(0.1, 0.05, 1));
  const std::vector<Vec3> anchors = render_anchors(Vec3(0, 0, -3), target.direction(), w.config.render);
  const Vec3 radiance(0.3, 0.6, 0.9);
  SampledRayField f(RayIrrep{}, 3);
  for (const Vec3& a : anchors) {
    for (int k = 0; k < 2; ++k) {
      Vec3 d = random_unit_vector(rng);
      while (std::abs(d.dot(target.direction())) > 0.9) d = random_unit_vector(rng);
      f.push_back(ray_through(a, d), radiance.cast<Complex>());
    }
  }
  const RenderResult r = render_ray(f, w.render, target, anchors, param_of(target, Vec3(0, 0, -3)) + w.config.render.t_max);
  EXPECT_FALSE(r.no_contributors);
  EXPECT_LE((r.rgb - radiance).norm(), 1e-12);
}

TEST(RenderRay, ZeroDensityAndNoContributorsGiveBackground) {
  PipelineWeights w = PipelineWeights::random(PipelineConfig{}, 7);
  const SampledRayField f = small_scene_field();
  const Camera cam = look_at(Vec3(2.6, -1.2, 1.4), Vec3(0, 0, 0.1), 0.9, 4, 4);
  w.render.density.setZero();
  w.render.density_bias = -800.0;
  for (const RenderResult& px : render_view(f, w, cam)) EXPECT_EQ(px.rgb, Vec3::Zero());
  SampledRayField far(RayIrrep{}, 3);
  far.push_back(ray_through(Vec3(40, 40, 40), Vec3::UnitZ()), CMat::Ones(3, 1));
  const std::vector<RenderResult> empty = render_view(far, PipelineWeights::random(PipelineConfig{}, 7), cam);
  for (const RenderResult& px : empty) {
    EXPECT_TRUE(px.no_contributors);
    EXPECT_EQ(px.rgb, Vec3::Zero());
  }
}

TEST(LeastSquares, RecoversGeneratingProfile) {
  Rng rng(93);
  const SampledRayField f = small_scene_field();
  const RadialBasis basis = RadialBasis::uniform(0.3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
  Eigen::VectorXd truth(3 * basis.size());
  for (Eigen::Index k = 0; k < truth.size(); ++k) truth[k] = rng.uniform(-1, 1);
  // Targets through the convolution itself, not the design matrix.
  const KernelBank bank({profile_entry(f, basis, truth)}, KernelSupport::make(0.3, std::numbers::pi));
  const SampledPointField generated = conv_ray_to_point(f, bank, pts, 0);
  std::vector<double> targets;
  for (int i = 0; i < generated.size(); ++i) targets.push_back(generated.values(i)(0, 0));
  const ProfileFit fit = fit_radial_profiles_ls(f, basis, 0.3, pts, targets);
  ASSERT_FALSE(fit.rank_deficient);
  EXPECT_LE((fit.coeffs - truth).norm() / truth.norm(), 1e-8);
  EXPECT_LE(fit.residual_norm, 1e-8);
}

TEST(LeastSquares, ZeroTargetsAndRankDeficiency) {
  const SampledRayField f = small_scene_field();
  const RadialBasis basis = RadialBasis::uniform(0.3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(20.0 + i, 0, 0);  // no ray nearby
  const ProfileFit fit = fit_radial_profiles_ls(f, basis, 0.3, pts, std::vector<double>(30, 1.0));
  EXPECT_TRUE(fit.rank_deficient);
  EXPECT_EQ(fit.coeffs.norm(), 0.0);
  std::vector<Vec3> near;
  for (int i = 0; i < 30; ++i) near.emplace_back(0.02 * i - 0.3, 0.1, 0.0);
  EXPECT_EQ(fit_radial_profiles_ls(f, basis, 0.3, near, std::vector<double>(30, 0.0)).coeffs.norm(), 0.0);
}
