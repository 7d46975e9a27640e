#include "rayfield/ray_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rayfield/error.hpp"

namespace rayfield {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnsupportedDegree: return "unsupported-degree";
    case ErrorCode::kMixedFieldTypes: return "mixed-field-types";
    case ErrorCode::kMissingBankEntry: return "missing-bank-entry";
    case ErrorCode::kEmptyNeighborhood: return "empty-neighborhood";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kNonMonotone: return "non-monotone";
    case ErrorCode::kInternalConsistency: return "internal-consistency";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

namespace {

// Directions closer than this to parallel use the foot-point offset formula.
constexpr double kParallelThreshold = 1e-9;
constexpr double kOnRayTolerance = 1e-9;

}  // namespace

Ray Ray::make(const Vec3& direction, const Vec3& moment) {
  if (!direction.allFinite() || !moment.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "ray has non-finite coordinates");
  }
  if (std::abs(direction.norm() - 1.0) > kRayTolerance) {
    std::ostringstream os;
    os << "ray direction is not unit (|d| = " << direction.norm() << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (std::abs(direction.dot(moment)) > kRayTolerance) {
    std::ostringstream os;
    os << "ray moment is not orthogonal to its direction (d.m = " << direction.dot(moment) << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return Ray(direction, moment);
}

Ray origin_ray() { return Ray::unchecked(Vec3::UnitZ(), Vec3::Zero()); }

RigidMotion RigidMotion::make(const Mat3& rotation, const Vec3& translation) {
  const double orth = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= kRayTolerance) || !(std::abs(rotation.determinant() - 1.0) <= kRayTolerance)) {
    throw Error(ErrorCode::kInvalidArgument, "rotation is not orthonormal with det +1");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "translation is not finite");
  }
  return RigidMotion{rotation, translation};
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Ray ray_through(const Vec3& p, const Vec3& d) {
  const double n = d.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !p.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "ray_through needs a finite nonzero direction");
  }
  const Vec3 u = d / n;
  return Ray::unchecked(u, p.cross(u));
}

Ray apply_motion(const RigidMotion& g, const Ray& x) {
  const Vec3 d = g.rotation * x.direction();
  const Vec3 m = g.rotation * x.moment() + g.translation.cross(d);
  return Ray::unchecked(d, m);
}

Vec3 apply_motion(const RigidMotion& g, const Vec3& p) {
  return g.rotation * p + g.translation;
}

double ray_distance(const Ray& x, const Ray& y) {
  const Vec3 cross = x.direction().cross(y.direction());
  const double s = cross.norm();
  if (s > kParallelThreshold) {
    return std::abs(x.direction().dot(y.moment()) + y.direction().dot(x.moment())) / s;
  }
  const Vec3 offset = y.foot() - x.foot();
  return (offset - offset.dot(x.direction()) * x.direction()).norm();
}

double ray_angle(const Ray& x, const Ray& y) {
  return std::acos(std::clamp(x.direction().dot(y.direction()), -1.0, 1.0));
}

Vec3 point_at(const Ray& x, double t) { return x.foot() + t * x.direction(); }

double param_of(const Ray& x, const Vec3& p) {
  const Vec3 rel = p - x.foot();
  const double t = rel.dot(x.direction());
  const double off = (rel - t * x.direction()).norm();
  if (!(off <= kOnRayTolerance)) {
    std::ostringstream os;
    os << "point is " << off << " away from the ray";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return t;
}

}  // namespace rayfield
