#include "rayfield/representations.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rayfield/error.hpp"

namespace rayfield {

namespace {

constexpr double kOnRayTolerance = 1e-9;
constexpr double kRealTolerance = 1e-12;
// Relative tolerance for matching anchor spacing and frequency grids.
constexpr double kGridTolerance = 1e-9;

double uniform_spacing(const std::vector<double>& params) {
  const int n = static_cast<int>(params.size());
  if (n < 2) return 1.0;
  const double spacing = (params.back() - params.front()) / (n - 1);
  for (int k = 1; k < n; ++k) {
    if (std::abs(params[k] - params[k - 1] - spacing) > kGridTolerance * std::max(1.0, spacing)) {
      throw Error(ErrorCode::kGridMismatch, "anchors are not uniformly spaced");
    }
  }
  return spacing;
}

void check_grid(const std::vector<double>& frequencies, int count, double spacing) {
  if (static_cast<int>(frequencies.size()) != count) {
    std::ostringstream os;
    os << frequencies.size() << " frequencies for " << count << " anchors";
    throw Error(ErrorCode::kGridMismatch, os.str());
  }
  const std::vector<double> expected = fourier_grid(count, spacing);
  for (int j = 0; j < count; ++j) {
    if (std::abs(frequencies[j] - expected[j]) > kGridTolerance * std::max(1.0, std::abs(expected[j]))) {
      throw Error(ErrorCode::kGridMismatch, "frequencies do not match the anchor grid");
    }
  }
}

}  // namespace

FieldType::FieldType(RayRegular t) : kind_(t) {
  if (t.samples < 1 || !(t.t_min < t.t_max)) {
    throw Error(ErrorCode::kInvalidArgument, "regular type needs samples >= 1 and t_min < t_max");
  }
  if (t.omega1 < 0) throw Error(ErrorCode::kInvalidArgument, "omega1 must be nonnegative");
}

FieldType::FieldType(PointIrrep t) : kind_(t) {
  if (t.l < 0) throw Error(ErrorCode::kInvalidArgument, "negative degree");
  if (t.l > 1) throw Error(ErrorCode::kUnsupportedDegree, "point features support l = 0 and l = 1 only");
}

const RayIrrep& FieldType::ray_irrep() const {
  if (const auto* p = std::get_if<RayIrrep>(&kind_)) return *p;
  throw Error(ErrorCode::kInvalidArgument, "expected a ray-irrep type, got " + describe());
}

const RayRegular& FieldType::ray_regular() const {
  if (const auto* p = std::get_if<RayRegular>(&kind_)) return *p;
  throw Error(ErrorCode::kInvalidArgument, "expected a ray-regular type, got " + describe());
}

const PointIrrep& FieldType::point() const {
  if (const auto* p = std::get_if<PointIrrep>(&kind_)) return *p;
  throw Error(ErrorCode::kInvalidArgument, "expected a point type, got " + describe());
}

int FieldType::rep_dim() const {
  if (is_ray_irrep()) return 1;
  if (is_ray_regular()) return ray_regular().samples;
  return 2 * point().l + 1;
}

std::string FieldType::describe() const {
  std::ostringstream os;
  if (const auto* r = std::get_if<RayIrrep>(&kind_)) {
    os << "ray-irrep(" << r->omega1 << ", " << r->omega2 << ")";
  } else if (const auto* g = std::get_if<RayRegular>(&kind_)) {
    os << "ray-regular(" << g->omega1 << ", " << g->samples << ", [" << g->t_min << ", " << g->t_max << "])";
  } else {
    os << "point-irrep(" << std::get<PointIrrep>(kind_).l << ")";
  }
  return os.str();
}

Feature::Feature(FieldType t, CMat v) : type(std::move(t)), values(std::move(v)) {
  if (values.rows() < 1 || values.cols() != type.rep_dim()) {
    std::ostringstream os;
    os << "feature of type " << type.describe() << " has shape " << values.rows() << "x" << values.cols();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (type.is_point() && values.imag().cwiseAbs().maxCoeff() >= kRealTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "point features must be real");
  }
}

SampledRayField::SampledRayField(FieldType type, int channels) : type_(std::move(type)), channels_(channels) {
  if (type_.is_point()) throw Error(ErrorCode::kInvalidArgument, "ray field cannot carry a point type");
  if (channels_ < 1) throw Error(ErrorCode::kInvalidArgument, "channels must be positive");
}

SampledRayField SampledRayField::from_features(const std::vector<Ray>& rays,
                                               const std::vector<Feature>& features) {
  if (rays.size() != features.size() || rays.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rays and features must be nonempty and of equal length");
  }
  SampledRayField field(features.front().type, features.front().channels());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (!(features[i].type == field.type()) || features[i].channels() != field.channels()) {
      std::ostringstream os;
      os << "feature " << i << " has type " << features[i].type.describe() << " with "
         << features[i].channels() << " channels; field is " << field.type().describe();
      throw Error(ErrorCode::kMixedFieldTypes, os.str());
    }
    field.push_back(rays[i], features[i].values);
  }
  return field;
}

void SampledRayField::push_back(const Ray& ray, const CMat& values, int view) {
  if (values.rows() != channels_ || values.cols() != type_.rep_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "value shape does not match the field type");
  }
  rays_.push_back(ray);
  values_.push_back(values);
  views_.push_back(view);
}

SampledPointField::SampledPointField(int l, int channels) : l_(l), channels_(channels) {
  static_cast<void>(FieldType(PointIrrep{l}));  // validates the degree
  if (channels_ < 1) throw Error(ErrorCode::kInvalidArgument, "channels must be positive");
}

void SampledPointField::push_back(const Vec3& point, const RMat& values) {
  if (values.rows() != channels_ || values.cols() != 2 * l_ + 1) {
    throw Error(ErrorCode::kInvalidArgument, "value shape does not match the point degree");
  }
  points_.push_back(point);
  values_.push_back(values);
}

AnchoredSamples::AnchoredSamples(const Ray& ray, std::vector<Vec3> anchors, int omega1, CMat values)
    : ray_(ray), anchors_(std::move(anchors)), omega1_(omega1), values_(std::move(values)) {
  if (anchors_.empty()) throw Error(ErrorCode::kInvalidArgument, "anchored samples need an anchor");
  if (values_.cols() != static_cast<Eigen::Index>(anchors_.size()) || values_.rows() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "anchored values must be channels x anchors");
  }
  double previous = 0.0;
  for (std::size_t k = 0; k < anchors_.size(); ++k) {
    const Vec3 rel = anchors_[k] - ray_.foot();
    const double t = rel.dot(ray_.direction());
    if ((rel - t * ray_.direction()).norm() > kOnRayTolerance) {
      std::ostringstream os;
      os << "anchor " << k << " is off the ray";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    if (k > 0 && !(t > previous)) {
      std::ostringstream os;
      os << "anchor " << k << " does not increase along the ray";
      throw Error(ErrorCode::kNonMonotone, os.str());
    }
    previous = t;
  }
}

std::vector<double> AnchoredSamples::params() const {
  std::vector<double> out;
  out.reserve(anchors_.size());
  for (const Vec3& a : anchors_) out.push_back((a - ray_.foot()).dot(ray_.direction()));
  return out;
}

Complex irrep_so2r(const RayIrrep& type, const StabilizerElement& h) {
  return std::polar(1.0, -(type.omega1 * h.gamma() + type.omega2 * h.tau()));
}

RMat wigner_d(int l, const Mat3& rotation) {
  if (l == 0) return RMat::Ones(1, 1);
  if (l == 1) return rotation;
  if (l < 0) throw Error(ErrorCode::kInvalidArgument, "negative degree");
  throw Error(ErrorCode::kUnsupportedDegree, "Wigner matrices are provided for l = 0 and l = 1 only");
}

SampledRayField act_on_ray_field(const RigidMotion& g, const SampledRayField& field) {
  const RayIrrep& type = field.type().ray_irrep();
  SampledRayField out(field.type(), field.channels());
  for (int i = 0; i < field.size(); ++i) {
    const Complex phase = irrep_so2r(type, twist_ray(g, field.ray(i)));
    out.push_back(apply_motion(g, field.ray(i)), phase * field.values(i), field.view(i));
  }
  return out;
}

SampledPointField act_on_point_field(const RigidMotion& g, const SampledPointField& field) {
  SampledPointField out(field.degree(), field.channels());
  const RMat d = wigner_d(field.degree(), g.rotation);
  for (int i = 0; i < field.size(); ++i) {
    out.push_back(apply_motion(g, field.point(i)), field.values(i) * d.transpose());
  }
  return out;
}

AnchoredSamples act_on_anchored_samples(const RigidMotion& g, const AnchoredSamples& a) {
  const double gamma = twist_sphere(g.rotation, a.ray().direction());
  std::vector<Vec3> anchors;
  anchors.reserve(a.anchors().size());
  for (const Vec3& p : a.anchors()) anchors.push_back(apply_motion(g, p));
  const Complex phase = std::polar(1.0, -a.omega1() * gamma);
  return AnchoredSamples(apply_motion(g, a.ray()), std::move(anchors), a.omega1(), phase * a.values());
}

std::vector<double> fourier_grid(int count, double spacing) {
  if (count < 1 || !(spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fourier grid needs count >= 1 and positive spacing");
  }
  std::vector<double> out(count);
  const int first = -(count / 2);
  for (int j = 0; j < count; ++j) {
    out[j] = 2.0 * std::numbers::pi * (first + j) / (count * spacing);
  }
  return out;
}

AnchoredSamples irrep_to_samples(const Ray& ray, const std::vector<Vec3>& anchors, int omega1,
                                 const std::vector<double>& frequencies, const CMat& coeffs) {
  const int n = static_cast<int>(anchors.size());
  if (coeffs.cols() != n) throw Error(ErrorCode::kGridMismatch, "coefficient count differs from anchor count");
  // Validate anchors first so the parameters below are meaningful.
  AnchoredSamples shell(ray, anchors, omega1, CMat::Zero(coeffs.rows(), n));
  const std::vector<double> t = shell.params();
  check_grid(frequencies, n, uniform_spacing(t));
  CMat basis(n, n);  // basis(j, k) = e^{i w_j t_k}
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) basis(j, k) = std::polar(1.0, frequencies[j] * t[k]);
  return AnchoredSamples(ray, anchors, omega1, coeffs * basis);
}

CMat samples_to_irrep(const AnchoredSamples& a, const std::vector<double>& frequencies) {
  const int n = a.size();
  const std::vector<double> t = a.params();
  check_grid(frequencies, n, uniform_spacing(t));
  CMat analysis(n, n);  // analysis(k, j) = e^{-i w_j t_k} / N
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) analysis(k, j) = std::polar(1.0 / n, -frequencies[j] * t[k]);
  return a.values() * analysis;
}

Complex inner_product(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "inner product of mismatched shapes");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

}  // namespace rayfield
