#include "rayfield/group_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rayfield/error.hpp"

namespace rayfield {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleTolerance = 1e-12;
constexpr double kReconstructionTolerance = 1e-9;

double canonical_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

}  // namespace

StabilizerElement::StabilizerElement(double gamma, double tau)
    : gamma_(canonical_angle(gamma)), tau_(tau) {}

StabilizerElement StabilizerElement::operator*(const StabilizerElement& other) const {
  return StabilizerElement(gamma_ + other.gamma_, tau_ + other.tau_);
}

StabilizerElement StabilizerElement::inverse() const { return StabilizerElement(-gamma_, -tau_); }

RigidMotion StabilizerElement::as_motion() const {
  return RigidMotion{rot_z(gamma_), tau_ * Vec3::UnitZ()};
}

double wrap_angle(double angle) {
  double a = std::remainder(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

double stabilizer_residual(const StabilizerElement& a, const StabilizerElement& b) {
  return std::max(std::abs(wrap_angle(a.gamma() - b.gamma())), std::abs(a.tau() - b.tau()));
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
  return RigidMotion{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidMotion invert(const RigidMotion& g) {
  const Mat3 rt = g.rotation.transpose();
  return RigidMotion{rt, -(rt * g.translation)};
}

double motion_residual(const RigidMotion& a, const RigidMotion& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

Mat3 SphereSection::rotation() const { return rot_z(alpha) * rot_y(beta); }

SphereSection sphere_angles(const Vec3& d) {
  const double planar = std::hypot(d.x(), d.y());
  const double alpha = planar < kPoleTolerance ? 0.0 : std::atan2(d.y(), d.x());
  const double beta = std::acos(std::clamp(d.z(), -1.0, 1.0));
  return {alpha, beta};
}

Mat3 section_sphere(const Vec3& d) { return sphere_angles(d).rotation(); }

RigidMotion section_ray(const Ray& x) {
  return RigidMotion{section_sphere(x.direction()), x.foot()};
}

RigidMotion section_point(const Vec3& p) { return RigidMotion{Mat3::Identity(), p}; }

double twist_sphere(const Mat3& rotation, const Vec3& d) {
  const Mat3 m = section_sphere(rotation * d).transpose() * rotation * section_sphere(d);
  return std::atan2(m(1, 0), m(0, 0));
}

StabilizerElement twist_ray(const RigidMotion& g, const Ray& x) {
  const Vec3 rd = g.rotation * x.direction();
  const StabilizerElement h(twist_sphere(g.rotation, x.direction()), g.translation.dot(rd));

  const Ray gx = apply_motion(g, x);
  const RigidMotion lhs = compose(g, section_ray(x));
  const RigidMotion rhs = compose(section_ray(gx), h.as_motion());
  const double residual = motion_residual(lhs, rhs);
  if (!(residual <= kReconstructionTolerance)) {
    std::ostringstream os;
    os << "twist reconstruction residual " << residual << " exceeds tolerance";
    throw Error(ErrorCode::kInternalConsistency, os.str());
  }
  return h;
}

Mat3 twist_point(const RigidMotion& g, const Vec3& /*p*/) { return g.rotation; }

}  // namespace rayfield
