#pragma once

#include "rayfield/ray_geometry.hpp"

namespace rayfield {

/// Element (gamma, tau) of SO(2) x R: rotation about and translation along
/// the z-axis. Gamma is kept in [0, 2pi).
class StabilizerElement {
 public:
  StabilizerElement() = default;
  StabilizerElement(double gamma, double tau);

  double gamma() const { return gamma_; }
  double tau() const { return tau_; }

  /// The group is abelian: angles and translations add.
  StabilizerElement operator*(const StabilizerElement& other) const;
  StabilizerElement inverse() const;

  /// (R_Z(gamma), tau e_z).
  RigidMotion as_motion() const;

 private:
  double gamma_ = 0.0;
  double tau_ = 0.0;
};

/// Distance between stabilizer elements, wrapping the angle.
double stabilizer_residual(const StabilizerElement& a, const StabilizerElement& b);

/// Signed angle difference wrapped into (-pi, pi].
double wrap_angle(double angle);

RigidMotion compose(const RigidMotion& a, const RigidMotion& b);
RigidMotion invert(const RigidMotion& g);

/// Max-abs entry difference of rotation and translation.
double motion_residual(const RigidMotion& a, const RigidMotion& b);

struct SphereSection {
  double alpha = 0.0;
  double beta = 0.0;

  /// R_Z(alpha) R_Y(beta).
  Mat3 rotation() const;
};

/// Angles of the sphere section. Directions within 1e-12 of the z-axis get
/// alpha = 0, so both poles are handled deterministically.
SphereSection sphere_angles(const Vec3& d);

/// Rotation carrying e_z to d.
Mat3 section_sphere(const Vec3& d);

/// (section_sphere(d), d x m); carries the origin ray to x.
RigidMotion section_ray(const Ray& x);

/// (I, p).
RigidMotion section_point(const Vec3& p);

/// h(g, x) = s(g x)^{-1} g s(x) as an element of the stabilizer.
/// Throws Error(kInternalConsistency) if the reconstruction g s(x) = s(g x) h
/// fails by more than 1e-9.
StabilizerElement twist_ray(const RigidMotion& g, const Ray& x);

/// Twist for the point bundle; equal to R and independent of p.
Mat3 twist_point(const RigidMotion& g, const Vec3& p);

/// Twist for the sphere bundle: s(R d)^{-1} R s(d), a rotation about z.
double twist_sphere(const Mat3& rotation, const Vec3& d);

}  // namespace rayfield
