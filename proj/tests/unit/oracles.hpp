#pragma once

// Independent reference computations used as test oracles. Everything here
// works with homogeneous 4x4 matrices or brute-force geometry rather than the
// closed forms used in the library.

#include <Eigen/Dense>
#include <cmath>

#include "rayfield/group_theory.hpp"
#include "rayfield/ray_geometry.hpp"

namespace oracle {

using rayfield::Mat3;
using rayfield::Ray;
using rayfield::RigidMotion;
using rayfield::Vec3;
using Mat4 = Eigen::Matrix4d;

inline Mat4 homogeneous(const RigidMotion& g) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = g.rotation;
  m.topRightCorner<3, 1>() = g.translation;
  return m;
}

inline RigidMotion from_homogeneous(const Mat4& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

/// Some point on the ray: solve p x d = m in the least-squares sense.
inline Vec3 point_on(const Ray& x) {
  Mat3 cross_d;
  const Vec3& d = x.direction();
  cross_d << 0, d.z(), -d.y(), -d.z(), 0, d.x(), d.y(), -d.x(), 0;  // p -> p x d
  return cross_d.completeOrthogonalDecomposition().solve(x.moment());
}

/// Moves a ray by transforming two of its points.
inline Ray move_ray(const RigidMotion& g, const Ray& x) {
  const Vec3 a = point_on(x);
  const Vec3 b = a + x.direction();
  const Vec3 ga = g.rotation * a + g.translation;
  const Vec3 gb = g.rotation * b + g.translation;
  const Vec3 d = (gb - ga).normalized();
  return Ray::unchecked(d, ga.cross(d));
}

/// Closest distance between two lines by minimizing over both parameters.
inline double line_distance(const Ray& x, const Ray& y) {
  const Vec3 a = point_on(x), b = point_on(y);
  Eigen::Matrix<double, 3, 2> A;
  A.col(0) = x.direction();
  A.col(1) = -y.direction();
  const Eigen::Vector2d st = A.completeOrthogonalDecomposition().solve(b - a);
  return (a + st[0] * x.direction() - b - st[1] * y.direction()).norm();
}

/// Twist h(g, x) = s(gx)^{-1} g s(x) by homogeneous matrix products; returns
/// (angle of the rotation about z, translation along z).
inline std::pair<double, double> twist(const RigidMotion& g, const Ray& x) {
  const Mat4 h = homogeneous(rayfield::section_ray(move_ray(g, x))).inverse() * homogeneous(g) *
                 homogeneous(rayfield::section_ray(x));
  return {std::atan2(h(1, 0), h(0, 0)), h(2, 3)};
}

inline double angle_diff(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * M_PI)); }

}  // namespace oracle
