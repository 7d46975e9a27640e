#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "rayfield/random.hpp"
#include "rayfield/representations.hpp"

namespace rayfield {

/// Kernels are nonzero only on rays within distance d0 and angle beta0.
struct KernelSupport {
  double d0 = std::numeric_limits<double>::infinity();
  double beta0 = 3.141592653589793;

  /// Validates d0 >= 0 and 0 <= beta0 <= pi.
  static KernelSupport make(double d0, double beta0);
};

/// Gaussian bumps in a radial argument, optionally multiplied by Gaussian
/// bumps in an angle (separable product). Basis index = radial * angular_count + angular.
struct RadialBasis {
  std::vector<double> centers;
  double sigma = 1.0;
  std::vector<double> angular_centers;  // empty: radial only
  double angular_sigma = 1.0;

  /// 8 radial centers uniform on [0, radius] with sigma = radius / 8; when
  /// angular_range > 0, 4 angular centers on [0, angular_range] with sigma = range / 4.
  static RadialBasis uniform(double radius, double angular_range = 0.0);

  int size() const;
  bool has_angle() const { return !angular_centers.empty(); }
  Eigen::VectorXd evaluate(double r, double angle) const;
  void validate() const;
};

/// A single scalar profile: sum of coefficients times basis functions.
struct RadialProfile {
  RadialBasis basis;
  CVec coeffs;

  Complex operator()(double r, double angle = 0.0) const;
};

/// Profiles for one (type_in, type_out) wiring. Row ((o * in + i) * components + c)
/// of `coeffs` holds the basis coefficients of output channel o, input channel
/// i, component c. Components is 3 for degree-1 point outputs, 1 otherwise.
struct KernelEntry {
  FieldType type_in;
  FieldType type_out;
  int in_channels = 1;
  int out_channels = 1;
  int components = 1;
  RadialBasis basis;
  CMat coeffs;

  /// Shape checks; point outputs must have real coefficients.
  void validate() const;

  RadialProfile profile(int out, int in, int component = 0) const;

  /// out_channels x in_channels matrix of profile values for component c.
  CMat profile_matrix(double r, double angle, int component = 0) const;

  /// Random coefficients uniform in [-0.5, 0.5] (real and imaginary parts;
  /// imaginary part zero for point outputs).
  static KernelEntry random(FieldType type_in, FieldType type_out, int in_channels, int out_channels,
                            RadialBasis basis, Rng& rng);
};

class KernelBank {
 public:
  KernelBank() = default;
  KernelBank(std::vector<KernelEntry> entries, KernelSupport support);

  /// Entry with exactly these types. Throws Error(kMissingBankEntry).
  const KernelEntry& find(const FieldType& type_in, const FieldType& type_out) const;

  /// Entry mapping type_in to a regular output with this rotation frequency.
  const KernelEntry& find_regular(const FieldType& type_in, int omega1_out) const;

  const std::vector<KernelEntry>& entries() const { return entries_; }
  const KernelSupport& support() const { return support_; }

  std::string to_json() const;
  /// Throws Error(kParse) naming the offending entry.
  static KernelBank from_json(const std::string& text);

 private:
  std::vector<KernelEntry> entries_;
  KernelSupport support_;
};

/// z-coordinate of the point of the z-axis closest to x.
/// Throws Error(kInvalidArgument) for rays parallel to the z-axis.
double height_g(const Ray& x);

/// True when the direction is within 1e-9 of +e_z (sign > 0) or -e_z (sign < 0).
bool at_pole(const Ray& x, int sign);

/// Radial arguments of ray kernels: distance to and angle from the origin ray.
double kernel_radius(const Ray& x);
double kernel_angle(const Ray& x);

/// Rotation-frequency phase of the ray kernel, including the pole branches.
Complex rotation_phase(int omega1_in, int omega1_out, const Ray& x);

/// Translation-frequency phase of the ray kernel, including the pole branches.
Complex translation_phase(double omega2_in, double omega2_out, const Ray& x);

Complex kappa1(int omega1_in, int omega1_out, const Ray& x, const RadialProfile& profile);
Complex kappa2_irrep(double omega2_in, double omega2_out, const Ray& x, const RadialProfile& profile);

/// Single weighted sample along the output ray.
struct DiracSample {
  Complex weight;
  double anchor_param = 0.0;
};

/// Zero weight at the poles.
DiracSample kappa2_regular(double omega2_in, const Ray& x, const RadialProfile& profile);

/// Ray-to-point kernel of degree l_out with real profiles (one for l = 0,
/// three for l = 1: along d, along m, along d x m). Zero when |m| > d0.
Eigen::VectorXd kappa_ray_to_point(int l_out, const Ray& x, const std::vector<RadialProfile>& profiles,
                                   double d0);

/// Full ray-to-ray kernel matrix (out x in) for irrep types at relative ray z.
CMat ray_kernel_matrix(const KernelEntry& entry, const Ray& z);

/// Regular-output kernel: out x in weights placed at one anchor parameter.
struct RegularKernelValue {
  CMat weights;
  double anchor_param = 0.0;
  bool nonzero = false;
};
RegularKernelValue regular_kernel_matrix(const KernelEntry& entry, const Ray& z);

/// Point-output kernel: one out x in real matrix per component of D_l.
std::vector<RMat> point_kernel_matrices(const KernelEntry& entry, const Ray& z, double d0);

/// Kernels under test for the constraint verifier.
struct RayKernelCheck {
  RayIrrep type_in;
  RayIrrep type_out;
  std::function<Complex(const Ray&)> kernel;
};
struct RegularKernelCheck {
  RayIrrep type_in;
  int omega1_out = 0;
  std::function<DiracSample(const Ray&)> kernel;
};
struct PointKernelCheck {
  int l_out = 0;
  std::function<Eigen::VectorXd(const Ray&)> kernel;
};
using KernelUnderTest = std::variant<RayKernelCheck, RegularKernelCheck, PointKernelCheck>;

/// Maximum absolute constraint residual over n random (h, x) draws with
/// |d_z| < 0.9 and |tau| <= 5 (ray kernels) or random rotations (point kernels).
double verify_kernel_constraint(const KernelUnderTest& kernel, int n_samples, std::uint64_t seed);

}  // namespace rayfield
