#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "rayfield/error.hpp"
#include "rayfield/kernels.hpp"
#include "rayfield/random.hpp"

using namespace rayfield;

namespace {

constexpr double kPi = std::numbers::pi;

RadialProfile random_profile(Rng& rng, bool real_only, double radius = 2.0, double angular = kPi) {
  RadialProfile p{RadialBasis::uniform(radius, angular), CVec()};
  p.coeffs.resize(p.basis.size());
  for (int k = 0; k < p.basis.size(); ++k)
    p.coeffs[k] = Complex(rng.uniform(-0.5, 0.5), real_only ? 0.0 : rng.uniform(-0.5, 0.5));
  return p;
}

// Ray through p with direction d, d not parallel to z.
Ray generic_ray(Rng& rng) {
  for (;;) {
    const Ray x = random_ray(rng, 2.0);
    if (std::abs(x.direction().z()) < 0.9) return x;
  }
}

}  // namespace

TEST(RadialBasis, UniformLayoutAndValues) {
  const RadialBasis b = RadialBasis::uniform(1.0, 2.0);
  ASSERT_EQ(b.centers.size(), 8u);
  ASSERT_EQ(b.angular_centers.size(), 4u);
  EXPECT_EQ(b.size(), 32);
  EXPECT_NEAR(b.sigma, 1.0 / 8, 1e-15);
  EXPECT_NEAR(b.angular_sigma, 0.5, 1e-15);
  const Eigen::VectorXd v = b.evaluate(b.centers[3], b.angular_centers[2]);
  EXPECT_NEAR(v[3 * 4 + 2], 1.0, 1e-15);
}

TEST(RadialProfile, SumsCoefficientsTimesBasis) {
  Rng rng(30);
  const RadialProfile p = random_profile(rng, false);
  const Eigen::VectorXd phi = p.basis.evaluate(0.4, 1.1);
  Complex want = 0.0;
  for (int k = 0; k < p.basis.size(); ++k) want += p.coeffs[k] * phi[k];
  EXPECT_LE(std::abs(p(0.4, 1.1) - want), 1e-14);
}

TEST(HeightG, HandValues) {
  EXPECT_NEAR(height_g(ray_through(Vec3(1, 0, 3), Vec3::UnitX())), 3.0, 1e-15);
  EXPECT_NEAR(height_g(ray_through(Vec3(1, 1, 2), Vec3::UnitX())), 2.0, 1e-15);
  EXPECT_THROW(height_g(ray_through(Vec3(1, 1, 2), Vec3::UnitZ())), Error);
}

TEST(HeightG, IsClosestPointOfZAxis) {
  // Brute force: the z-axis point minimizing the distance to the line.
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const Ray x = generic_ray(rng);
    const Vec3 a = oracle::point_on(x);
    Eigen::Matrix<double, 3, 2> A;
    A.col(0) = Vec3::UnitZ();
    A.col(1) = -x.direction();
    const Eigen::Vector2d st = A.colPivHouseholderQr().solve(a);
    EXPECT_NEAR(height_g(x), st[0], 1e-10);
  }
}

TEST(KernelRadius, MatchesLineDistance) {
  Rng rng(32);
  for (int i = 0; i < 100; ++i) {
    const Ray x = random_ray(rng, 2.0);
    EXPECT_NEAR(kernel_radius(x), oracle::line_distance(origin_ray(), x), 1e-10);
  }
}

TEST(Kappa1, ZeroOutputFrequencyIsRealOffPole) {
  Rng rng(33);
  const RadialProfile p = random_profile(rng, true);
  for (int i = 0; i < 50; ++i) {
    const Ray x = generic_ray(rng);
    EXPECT_EQ(rotation_phase(0, 0, x), Complex(1.0));
    EXPECT_EQ(kappa1(0, 0, x, p).imag(), 0.0);
  }
}

TEST(Kappa1, VanishesOnOriginRayForDifferentFrequencies) {
  Rng rng(34);
  const RadialProfile p = random_profile(rng, false);
  EXPECT_EQ(kappa1(1, 2, origin_ray(), p), Complex(0.0));
  EXPECT_NE(kappa1(1, 1, origin_ray(), p), Complex(0.0));
}

TEST(Kappa1, PoleBranchesUseMomentAngle) {
  const Ray north = Ray::make(Vec3::UnitZ(), Vec3(0.0, 0.5, 0.0));
  const double phi = kPi / 2;  // atan2(m_y, m_x)
  EXPECT_LE(std::abs(rotation_phase(1, 3, north) - std::polar(1.0, -2.0 * phi)), 1e-15);
  const Ray south = Ray::make(-Vec3::UnitZ(), Vec3(0.5, 0.0, 0.0));
  EXPECT_LE(std::abs(rotation_phase(1, -1, south) - Complex(1.0)), 1e-15);
  EXPECT_LE(std::abs(rotation_phase(1, 2, south) - Complex(1.0)), 1e-15);  // atan2 = 0
}

TEST(Kappa2, PoleRules) {
  Rng rng(35);
  const RadialProfile p = random_profile(rng, false);
  const Ray north = Ray::make(Vec3::UnitZ(), Vec3(0.2, 0.1, 0.0));
  EXPECT_EQ(kappa2_irrep(0.5, 0.7, north, p), Complex(0.0));
  EXPECT_NE(kappa2_irrep(0.5, 0.5, north, p), Complex(0.0));
  const Ray south = north.reversed();
  EXPECT_EQ(kappa2_irrep(0.5, 0.5, south, p), Complex(0.0));
  EXPECT_NE(kappa2_irrep(0.5, -0.5, south, p), Complex(0.0));
}

TEST(Kappa2, ZeroFrequenciesGiveProfile) {
  Rng rng(36);
  const RadialProfile p = random_profile(rng, true);
  const Ray x = generic_ray(rng);
  EXPECT_LE(std::abs(kappa2_irrep(0.0, 0.0, x, p) - p(kernel_radius(x), kernel_angle(x))), 1e-15);
}

TEST(Kappa2Regular, WeightAndPlacement) {
  Rng rng(37);
  const RadialProfile p = random_profile(rng, true);
  const Ray x = generic_ray(rng);
  const DiracSample s = kappa2_regular(0.0, x, p);
  EXPECT_LE(std::abs(s.weight - p(kernel_radius(x), kernel_angle(x))), 1e-15);
  EXPECT_NEAR(s.anchor_param, height_g(x), 1e-15);
  EXPECT_EQ(kappa2_regular(0.3, Ray::make(Vec3::UnitZ(), Vec3(1, 0, 0)), p).weight, Complex(0.0));
}

TEST(RayToPoint, AxisBranch) {
  Rng rng(38);
  std::vector<RadialProfile> three{random_profile(rng, true, 1.0, 0.0), random_profile(rng, true, 1.0, 0.0),
                                   random_profile(rng, true, 1.0, 0.0)};
  const Eigen::VectorXd l0 = kappa_ray_to_point(0, ray_through(Vec3::Zero(), Vec3(1, 2, 3)), {three[0]}, 1.0);
  EXPECT_NEAR(l0[0], three[0](0.0).real(), 1e-15);
  const Eigen::VectorXd l1 = kappa_ray_to_point(1, origin_ray(), three, 1.0);
  EXPECT_LE((l1 - three[0](0.0).real() * Vec3::UnitZ()).norm(), 1e-15);
  const Ray far = ray_through(Vec3(2, 0, 0), Vec3::UnitZ());
  EXPECT_EQ(kappa_ray_to_point(1, far, three, 1.0), Eigen::VectorXd::Zero(3));
}

TEST(VerifyKernelConstraint, ShippedKernelsPass) {
  Rng rng(39);
  const RadialProfile p = random_profile(rng, false);
  const RayKernelCheck k1{RayIrrep{1, 0.0}, RayIrrep{-2, 0.0},
                          [p](const Ray& x) { return kappa1(1, -2, x, p); }};
  const RayKernelCheck k2{RayIrrep{0, 0.4}, RayIrrep{0, 1.1},
                          [p](const Ray& x) { return kappa2_irrep(0.4, 1.1, x, p); }};
  const RegularKernelCheck reg{RayIrrep{0, 0.4}, 0, [p](const Ray& x) { return kappa2_regular(0.4, x, p); }};
  std::vector<RadialProfile> three{random_profile(rng, true, 1.5, 0.0), random_profile(rng, true, 1.5, 0.0),
                                   random_profile(rng, true, 1.5, 0.0)};
  const PointKernelCheck pk{1, [three](const Ray& x) { return kappa_ray_to_point(1, x, three, 1.5); }};
  EXPECT_LE(verify_kernel_constraint(k1, 2000, 1), 1e-10);
  EXPECT_LE(verify_kernel_constraint(k2, 2000, 2), 1e-10);
  EXPECT_LE(verify_kernel_constraint(reg, 2000, 3), 1e-10);
  EXPECT_LE(verify_kernel_constraint(pk, 2000, 4), 1e-10);
}

TEST(VerifyKernelConstraint, FullKernelMatrixPasses) {
  Rng rng(40);
  const KernelEntry e = KernelEntry::random(RayIrrep{1, 0.5}, RayIrrep{-1, -0.8}, 1, 1,
                                            RadialBasis::uniform(2.0, kPi), rng);
  const RayKernelCheck check{RayIrrep{1, 0.5}, RayIrrep{-1, -0.8},
                             [e](const Ray& x) { return ray_kernel_matrix(e, x)(0, 0); }};
  EXPECT_LE(verify_kernel_constraint(check, 2000, 5), 1e-10);
}

TEST(VerifyKernelConstraint, CorruptedPhaseFails) {
  Rng rng(41);
  const RadialProfile p = random_profile(rng, false);
  const RayKernelCheck bad{RayIrrep{0, 0.0}, RayIrrep{2, 0.0}, [p](const Ray& x) {
                             return p(kernel_radius(x), kernel_angle(x)) * std::conj(rotation_phase(0, 2, x));
                           }};
  EXPECT_GT(verify_kernel_constraint(bad, 200, 6), 1e-3);
}

TEST(VerifyKernelConstraint, ZeroKernelIsExact) {
  const RayKernelCheck zero{RayIrrep{1, 0.3}, RayIrrep{2, 0.0}, [](const Ray&) { return Complex(0.0); }};
  EXPECT_EQ(verify_kernel_constraint(zero, 100, 7), 0.0);
}

TEST(VerifyKernelConstraint, IndependentTwistOracle) {
  // kappa(hx) = rho_out(h) kappa(x) rho_in(h(h, x))^{-1}, twist from 4x4 products.
  Rng rng(42);
  const KernelEntry e = KernelEntry::random(RayIrrep{2, 0.3}, RayIrrep{1, -0.6}, 1, 1,
                                            RadialBasis::uniform(2.0, kPi), rng);
  for (int i = 0; i < 500; ++i) {
    const Ray x = generic_ray(rng);
    const StabilizerElement h = random_stabilizer(rng, 5.0);
    const auto [gamma, tau] = oracle::twist(h.as_motion(), x);
    const Complex rho_out = std::polar(1.0, -(1 * h.gamma() - 0.6 * h.tau()));
    const Complex rho_in_inv = std::polar(1.0, 2 * gamma + 0.3 * tau);
    const Complex lhs = ray_kernel_matrix(e, apply_motion(h.as_motion(), x))(0, 0);
    const Complex rhs = rho_out * ray_kernel_matrix(e, x)(0, 0) * rho_in_inv;
    EXPECT_LE(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(KernelBank, LookupAndJsonRoundTrip) {
  Rng rng(43);
  const RadialBasis b = RadialBasis::uniform(0.5, 1.0);
  const KernelBank bank({KernelEntry::random(RayIrrep{1, 0.5}, RayIrrep{0, 0.0}, 2, 3, b, rng),
                         KernelEntry::random(RayIrrep{}, RayRegular{1, 4, -1.0, 1.0}, 3, 2, b, rng),
                         KernelEntry::random(RayIrrep{}, PointIrrep{1}, 3, 2, RadialBasis::uniform(0.5), rng)},
                        KernelSupport::make(0.7, 2.0));
  EXPECT_EQ(bank.find(RayIrrep{1, 0.5}, RayIrrep{0, 0.0}).out_channels, 3);
  EXPECT_EQ(bank.find_regular(RayIrrep{}, 1).in_channels, 3);
  try {
    bank.find(RayIrrep{}, RayIrrep{2, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingBankEntry);
  }
  const KernelBank back = KernelBank::from_json(bank.to_json());
  ASSERT_EQ(back.entries().size(), 3u);
  EXPECT_EQ(back.support().d0, 0.7);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries()[i].coeffs, bank.entries()[i].coeffs);
    EXPECT_EQ(back.entries()[i].type_out, bank.entries()[i].type_out);
  }
  EXPECT_EQ(KernelBank::from_json(KernelBank({}, KernelSupport{}).to_json()).support().d0,
            std::numeric_limits<double>::infinity());
}

TEST(KernelBank, ParseErrorNamesEntry) {
  const std::string text = R"({"support": {"d0": 1.0, "beta0": 1.0}, "entries": [{"type_in": {"kind": "ray-irrep"}}]})";
  try {
    KernelBank::from_json(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("entries[0]"), std::string::npos);
  }
}

TEST(KernelEntry, PointOutputsNeedRealCoefficients) {
  Rng rng(44);
  KernelEntry e = KernelEntry::random(RayIrrep{}, PointIrrep{0}, 1, 1, RadialBasis::uniform(1.0), rng);
  EXPECT_NO_THROW(e.validate());
  e.coeffs(0, 0) = Complex(0.0, 1.0);
  EXPECT_THROW(e.validate(), Error);
}
