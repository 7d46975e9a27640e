#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "rayfield/conv.hpp"
#include "rayfield/error.hpp"
#include "rayfield/random.hpp"

using namespace rayfield;

namespace {

constexpr double kPi = std::numbers::pi;

CMat random_complex(Rng& rng, int rows, int cols, bool real_only = false) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(rng.uniform(-1, 1), real_only ? 0.0 : rng.uniform(-1, 1));
  return m;
}

SampledRayField random_field(Rng& rng, int n, FieldType type, int channels, bool real_only = false) {
  SampledRayField f(type, channels);
  for (int i = 0; i < n; ++i) f.push_back(random_ray(rng, 1.0), random_complex(rng, channels, 1, real_only));
  return f;
}

}  // namespace

TEST(Neighborhood, UnboundedSupportTakesAll) {
  Rng rng(50);
  const SampledRayField f = random_field(rng, 30, RayIrrep{}, 1);
  const std::vector<int> all = neighborhood(f, random_ray(rng, 1.0), KernelSupport{});
  ASSERT_EQ(all.size(), 30u);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(all[i], i);
}

TEST(Neighborhood, ZeroSupportTakesIdenticalRays) {
  Rng rng(51);
  SampledRayField f = random_field(rng, 10, RayIrrep{}, 1);
  f.push_back(f.ray(4), CMat::Ones(1, 1));
  const std::vector<int> same = neighborhood(f, f.ray(4), KernelSupport::make(0.0, 0.0));
  EXPECT_EQ(same, (std::vector<int>{4, 10}));
}

TEST(ConvRayToRay, ImpulseResponse) {
  Rng rng(52);
  const FieldType in = RayIrrep{1, 0.4}, out = RayIrrep{-2, 0.9};
  const KernelBank bank({KernelEntry::random(in, out, 2, 3, RadialBasis::uniform(2.0, kPi), rng)}, KernelSupport{});
  for (int trial = 0; trial < 50; ++trial) {
    SampledRayField f(in, 2);
    const Ray y = random_ray(rng, 1.0);
    const CMat value = random_complex(rng, 2, 1);
    f.push_back(y, value);
    const Ray q = random_ray(rng, 1.0);
    const RigidMotion to_local = invert(section_ray(q));
    const auto [gamma, tau] = oracle::twist(to_local, y);
    const CMat want = ray_kernel_matrix(bank.entries()[0], oracle::move_ray(to_local, y)) *
                      std::polar(1.0, -(1 * gamma + 0.4 * tau)) * value;
    EXPECT_LE((conv_ray_to_ray(f, bank, q, out).values - want).norm(), 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST(ConvRayToRay, IsLinearInTheField) {
  Rng rng(53);
  const FieldType in = RayIrrep{0, 0.0}, out = RayIrrep{1, 0.0};
  const KernelBank bank({KernelEntry::random(in, out, 1, 1, RadialBasis::uniform(1.0, kPi), rng)},
                        KernelSupport::make(1.0, kPi));
  SampledRayField a = random_field(rng, 40, in, 1);
  SampledRayField sum = a;
  SampledRayField b = a;
  for (int i = 0; i < a.size(); ++i) {
    b.values(i) = random_complex(rng, 1, 1);
    sum.values(i) = a.values(i) + 2.0 * b.values(i);
  }
  const Ray q = random_ray(rng, 0.5);
  const CMat lhs = conv_ray_to_ray(sum, bank, q, out).values;
  const CMat rhs = conv_ray_to_ray(a, bank, q, out).values + 2.0 * conv_ray_to_ray(b, bank, q, out).values;
  EXPECT_LE((lhs - rhs).norm(), 1e-12);
}

TEST(ConvRayToRay, MissingEntryThrows) {
  Rng rng(54);
  const KernelBank bank({KernelEntry::random(RayIrrep{}, RayIrrep{1, 0.0}, 1, 1, RadialBasis::uniform(1.0), rng)},
                        KernelSupport{});
  const SampledRayField f = random_field(rng, 5, RayIrrep{}, 1);
  try {
    conv_ray_to_ray(f, bank, origin_ray(), RayIrrep{2, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingBankEntry);
  }
}

TEST(ConvRayToRay, EquivariantUnderRandomMotions) {
  Rng rng(55);
  const FieldType in = RayIrrep{1, 0.5}, out = RayIrrep{2, -0.3};
  const KernelBank bank({KernelEntry::random(in, out, 2, 2, RadialBasis::uniform(1.0, 2.0), rng)},
                        KernelSupport::make(1.0, 2.0));
  const SampledRayField f = random_field(rng, 200, in, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidMotion g = random_motion(rng, 2.0);
    const Ray q = random_ray(rng, 0.8);
    const CMat base = conv_ray_to_ray(f, bank, q, out).values;
    const CMat moved = conv_ray_to_ray(act_on_ray_field(g, f), bank, apply_motion(g, q), out).values;
    const Complex phase = irrep_so2r(RayIrrep{2, -0.3}, twist_ray(g, q));
    EXPECT_LE((moved - phase * base).norm(), 1e-8 * base.norm());
  }
}

TEST(ConvRayToPoint, SymmetricBundleCancelsVectorOutput) {
  Rng rng(56);
  const KernelBank bank({KernelEntry::random(RayIrrep{}, PointIrrep{1}, 1, 1, RadialBasis::uniform(1.0), rng)},
                        KernelSupport::make(1.0, kPi));
  const Vec3 p(0.3, -0.1, 0.2);
  SampledRayField f(RayIrrep{}, 1);
  for (int i = 0; i < 10; ++i) {
    const Vec3 d = random_unit_vector(rng);
    f.push_back(ray_through(p, d), CMat::Ones(1, 1));
    f.push_back(ray_through(p, -d), CMat::Ones(1, 1));
  }
  EXPECT_LE(conv_ray_to_point(f, bank, p, 1).values.norm(), 1e-14);
}

TEST(ConvRayToPoint, EquivariantAndRejectsComplexInput) {
  Rng rng(57);
  const RadialBasis b = RadialBasis::uniform(0.8);
  const KernelBank bank({KernelEntry::random(RayIrrep{}, PointIrrep{0}, 3, 2, b, rng),
                         KernelEntry::random(RayIrrep{}, PointIrrep{1}, 3, 2, b, rng)},
                        KernelSupport::make(0.8, kPi));
  const SampledRayField f = random_field(rng, 300, RayIrrep{}, 3, true);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidMotion g = random_motion(rng, 2.0);
    const Vec3 p(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
    const SampledRayField gf = act_on_ray_field(g, f);
    const Vec3 gp = apply_motion(g, p);
    EXPECT_LE((conv_ray_to_point(gf, bank, gp, 0).values - conv_ray_to_point(f, bank, p, 0).values).norm(), 1e-12);
    const RMat v = conv_ray_to_point(f, bank, p, 1).values.real();
    const RMat gv = conv_ray_to_point(gf, bank, gp, 1).values.real();
    EXPECT_LE((gv - v * g.rotation.transpose()).norm(), 1e-12);
  }
  const SampledRayField complex_field = random_field(rng, 5, RayIrrep{}, 3, false);
  EXPECT_THROW(conv_ray_to_point(complex_field, bank, Vec3::Zero(), 0), Error);
}

TEST(NearestAnchor, BinsAndEnds) {
  const std::vector<double> params{0.0, 1.0, 2.0};
  EXPECT_EQ(nearest_anchor(params, 0.4), 0);
  EXPECT_EQ(nearest_anchor(params, 0.5), 0);  // tie goes low
  EXPECT_EQ(nearest_anchor(params, 1.6), 2);
  EXPECT_EQ(nearest_anchor(params, -0.5), 0);
  EXPECT_EQ(nearest_anchor(params, -0.51), -1);
  EXPECT_EQ(nearest_anchor(params, 2.51), -1);
}

TEST(ConvRegular, SingleSourceLandsInIntersectionBin) {
  Rng rng(58);
  const KernelBank bank(
      {KernelEntry::random(RayIrrep{}, RayRegular{0, 8, -1.0, 1.0}, 1, 1, RadialBasis::uniform(2.0, kPi), rng)},
      KernelSupport{});
  // Real coefficients so the zero-frequency weights are real.
  KernelEntry e = bank.entries()[0];
  e.coeffs = e.coeffs.real().cast<Complex>();
  const KernelBank real_bank({e}, KernelSupport{});
  for (int trial = 0; trial < 20; ++trial) {
    const Ray q = random_ray(rng, 1.0);
    std::vector<Vec3> anchors;
    for (int k = 0; k < 8; ++k) anchors.push_back(point_at(q, -1.0 + 0.25 * k));
    const int target = rng.uniform_int(0, 7);
    const double t_star = -1.0 + 0.25 * target + rng.uniform(-0.1, 0.1);
    Vec3 d = random_unit_vector(rng);
    while (std::abs(d.dot(q.direction())) > 0.9) d = random_unit_vector(rng);
    SampledRayField f(RayIrrep{}, 1);
    f.push_back(ray_through(point_at(q, t_star), d), CMat::Ones(1, 1));
    const AnchoredSamples out = conv_ray_to_ray_regular(f, real_bank, q, 0, anchors);
    for (int k = 0; k < 8; ++k) {
      if (k == target) {
        EXPECT_NE(out.values()(0, k), Complex(0.0));
        EXPECT_EQ(out.values()(0, k).imag(), 0.0);
      } else {
        EXPECT_EQ(out.values()(0, k), Complex(0.0));
      }
    }
  }
}

TEST(SphericalConv, MatchesRayConvolutionAndRejectsMixedCenters) {
  Rng rng(59);
  const FieldType in = RayIrrep{1, 0.0}, out = RayIrrep{-1, 0.0};
  const KernelBank bank({KernelEntry::random(in, out, 2, 2, RadialBasis::uniform(0.5, 1.0), rng)},
                        KernelSupport::make(0.5, 1.0));
  const Vec3 c(0.5, -1.0, 2.0);
  SampledRayField f(in, 2);
  for (int i = 0; i < 100; ++i) f.push_back(ray_through(c, random_unit_vector(rng)), random_complex(rng, 2, 1));
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 dq = random_unit_vector(rng);
    const CMat a = conv_ray_to_ray(f, bank, ray_through(c, dq), out).values;
    const CMat b = spherical_conv_intra_view(f, c, bank, dq, out).values;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
  f.push_back(ray_through(c + Vec3(0.1, 0, 0), Vec3::UnitX() + Vec3::UnitY()), CMat::Ones(2, 1));
  EXPECT_THROW(spherical_conv_intra_view(f, c, bank, Vec3::UnitZ(), out), Error);
  const KernelBank translating({KernelEntry::random(RayIrrep{0, 0.5}, RayIrrep{0, 0.5}, 1, 1,
                                                    RadialBasis::uniform(0.5, 1.0), rng)},
                               KernelSupport{});
  SampledRayField g(RayIrrep{0, 0.5}, 1);
  g.push_back(ray_through(c, Vec3::UnitZ()), CMat::Ones(1, 1));
  EXPECT_THROW(spherical_conv_intra_view(g, c, translating, Vec3::UnitZ(), RayIrrep{0, 0.5}), Error);
}
