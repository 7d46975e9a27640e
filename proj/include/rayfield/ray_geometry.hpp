#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace rayfield {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance used for the unit-direction and orthogonality invariants.
inline constexpr double kRayTolerance = 1e-12;

/// Oriented line in Plücker coordinates: unit direction d and moment m = p x d
/// for any point p on the line. (d, m) and (-d, -m) are different rays.
class Ray {
 public:
  /// Validating constructor; throws Error(kInvalidArgument) when |d| != 1 or
  /// d.m != 0 beyond kRayTolerance.
  static Ray make(const Vec3& direction, const Vec3& moment);

  /// Skips validation. For results of operations that preserve the invariants.
  static Ray unchecked(const Vec3& direction, const Vec3& moment) {
    return Ray(direction, moment);
  }

  const Vec3& direction() const { return d_; }
  const Vec3& moment() const { return m_; }

  /// Point of the line closest to the origin, d x m.
  Vec3 foot() const { return d_.cross(m_); }

  Ray reversed() const { return Ray(-d_, -m_); }

  bool operator==(const Ray& other) const { return d_ == other.d_ && m_ == other.m_; }

 private:
  Ray(const Vec3& d, const Vec3& m) : d_(d), m_(m) {}

  Vec3 d_;
  Vec3 m_;
};

/// The origin of ray space: the z-axis, ((0,0,1), (0,0,0)).
Ray origin_ray();

/// Element (R, t) of SE(3) acting as x -> R x + t on points.
struct RigidMotion {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidMotion identity() { return {}; }

  /// Validates R^T R = I and det R = 1 within kRayTolerance.
  static RigidMotion make(const Mat3& rotation, const Vec3& translation);
};

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

/// Ray through p with direction d (normalized). Throws on a zero direction.
Ray ray_through(const Vec3& p, const Vec3& d);

/// g x = (R d, R m + t x (R d)).
Ray apply_motion(const RigidMotion& g, const Ray& x);

/// g p = R p + t.
Vec3 apply_motion(const RigidMotion& g, const Vec3& p);

/// Euclidean distance between the two underlying lines.
double ray_distance(const Ray& x, const Ray& y);

/// Angle between the directions in [0, pi].
double ray_angle(const Ray& x, const Ray& y);

/// foot(x) + t d.
Vec3 point_at(const Ray& x, double t);

/// Inverse of point_at; throws when p is farther than 1e-9 from the line.
double param_of(const Ray& x, const Vec3& p);

}  // namespace rayfield
