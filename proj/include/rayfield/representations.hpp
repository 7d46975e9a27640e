#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "rayfield/group_theory.hpp"
#include "rayfield/ray_geometry.hpp"

namespace rayfield {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

/// Ray feature transforming as e^{-i(omega1 gamma + omega2 tau)}.
struct RayIrrep {
  int omega1 = 0;
  double omega2 = 0.0;
  bool operator==(const RayIrrep&) const = default;
};

/// Ray feature sampled at `samples` depths in [t_min, t_max]; rotation about
/// the ray acts with frequency omega1.
struct RayRegular {
  int omega1 = 0;
  int samples = 1;
  double t_min = 0.0;
  double t_max = 1.0;
  bool operator==(const RayRegular&) const = default;
};

/// Point feature of SO(3) degree l (0 or 1), stored in the real Cartesian basis.
struct PointIrrep {
  int l = 0;
  bool operator==(const PointIrrep&) const = default;
};

class FieldType {
 public:
  using Kind = std::variant<RayIrrep, RayRegular, PointIrrep>;

  FieldType(RayIrrep t) : kind_(t) {}
  FieldType(RayRegular t);
  FieldType(PointIrrep t);

  const Kind& kind() const { return kind_; }
  bool is_ray_irrep() const { return std::holds_alternative<RayIrrep>(kind_); }
  bool is_ray_regular() const { return std::holds_alternative<RayRegular>(kind_); }
  bool is_point() const { return std::holds_alternative<PointIrrep>(kind_); }
  const RayIrrep& ray_irrep() const;
  const RayRegular& ray_regular() const;
  const PointIrrep& point() const;

  /// 1 for ray irreps, `samples` for regular, 2l+1 for point irreps.
  int rep_dim() const;

  std::string describe() const;

  bool operator==(const FieldType&) const = default;

 private:
  Kind kind_;
};

/// Multi-channel value of one type; shape channels x rep_dim.
struct Feature {
  FieldType type;
  CMat values;

  Feature(FieldType type, CMat values);
  int channels() const { return static_cast<int>(values.rows()); }
};

/// Finite sampling of a ray field with one field type. View indices are
/// optional metadata (camera id) used by intra-view operators.
class SampledRayField {
 public:
  SampledRayField(FieldType type, int channels);

  /// Throws Error(kMixedFieldTypes) if the features disagree on type or
  /// channel count, kInvalidArgument on a size mismatch or empty input.
  static SampledRayField from_features(const std::vector<Ray>& rays,
                                       const std::vector<Feature>& features);

  void push_back(const Ray& ray, const CMat& values, int view = -1);

  int size() const { return static_cast<int>(rays_.size()); }
  const FieldType& type() const { return type_; }
  int channels() const { return channels_; }
  const Ray& ray(int i) const { return rays_[i]; }
  const CMat& values(int i) const { return values_[i]; }
  CMat& values(int i) { return values_[i]; }
  int view(int i) const { return views_[i]; }
  const std::vector<Ray>& rays() const { return rays_; }

 private:
  FieldType type_;
  int channels_;
  std::vector<Ray> rays_;
  std::vector<CMat> values_;
  std::vector<int> views_;
};

/// Finite sampling of a real point field of degree l.
class SampledPointField {
 public:
  SampledPointField(int l, int channels);

  void push_back(const Vec3& point, const RMat& values);

  int size() const { return static_cast<int>(points_.size()); }
  int degree() const { return l_; }
  int channels() const { return channels_; }
  const Vec3& point(int i) const { return points_[i]; }
  const RMat& values(int i) const { return values_[i]; }

 private:
  int l_;
  int channels_;
  std::vector<Vec3> points_;
  std::vector<RMat> values_;
};

/// Values attached to explicit points on one ray. Row = channel, column =
/// anchor. Rotation about the ray acts with frequency omega1.
class AnchoredSamples {
 public:
  /// Throws Error(kInvalidArgument) if an anchor is off the ray by more than
  /// 1e-9, Error(kNonMonotone) if anchors are not strictly increasing along it.
  AnchoredSamples(const Ray& ray, std::vector<Vec3> anchors, int omega1, CMat values);

  const Ray& ray() const { return ray_; }
  const std::vector<Vec3>& anchors() const { return anchors_; }
  int omega1() const { return omega1_; }
  const CMat& values() const { return values_; }
  int channels() const { return static_cast<int>(values_.rows()); }
  int size() const { return static_cast<int>(anchors_.size()); }

  /// Ray parameters of the anchors.
  std::vector<double> params() const;

 private:
  Ray ray_;
  std::vector<Vec3> anchors_;
  int omega1_;
  CMat values_;
};

/// e^{-i(omega1 gamma + omega2 tau)}.
Complex irrep_so2r(const RayIrrep& type, const StabilizerElement& h);

/// Degree-0 or degree-1 Wigner matrix in the real Cartesian basis.
/// Throws Error(kUnsupportedDegree) for l >= 2.
RMat wigner_d(int l, const Mat3& rotation);

/// Moves every ray to g x and multiplies its value by rho(h(g, x)).
/// Regular-type fields must use AnchoredSamples instead (kInvalidArgument).
SampledRayField act_on_ray_field(const RigidMotion& g, const SampledRayField& field);

SampledPointField act_on_point_field(const RigidMotion& g, const SampledPointField& field);

AnchoredSamples act_on_anchored_samples(const RigidMotion& g, const AnchoredSamples& a);

/// Frequencies 2 pi j / (N spacing) for j = -floor(N/2) .. N-1-floor(N/2).
std::vector<double> fourier_grid(int count, double spacing);

/// Evaluates sum_j c_j e^{i w_j t} at the anchors; coeffs is channels x N.
/// Throws Error(kGridMismatch) unless the anchors are uniform and the
/// frequencies match fourier_grid for their spacing.
AnchoredSamples irrep_to_samples(const Ray& ray, const std::vector<Vec3>& anchors, int omega1,
                                 const std::vector<double>& frequencies, const CMat& coeffs);

/// Discrete inverse of irrep_to_samples. Returns channels x N coefficients.
CMat samples_to_irrep(const AnchoredSamples& a, const std::vector<double>& frequencies);

/// Sum over entries of conj(a) b.
Complex inner_product(const CMat& a, const CMat& b);

}  // namespace rayfield
