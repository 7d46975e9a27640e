#include "rayfield/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rayfield/error.hpp"

namespace rayfield {

namespace {

using nlohmann::json;

constexpr double kPoleGuard = 1e-9;
constexpr double kMomentGuard = 1e-9;
constexpr double kFrequencyTolerance = 1e-12;
constexpr int kRadialCount = 8;
constexpr int kAngularCount = 4;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return out;
}

bool same_frequency(double a, double b) { return std::abs(a - b) < kFrequencyTolerance; }

json type_to_json(const FieldType& type) {
  if (type.is_ray_irrep()) {
    return {{"kind", "ray-irrep"}, {"omega1", type.ray_irrep().omega1}, {"omega2", type.ray_irrep().omega2}};
  }
  if (type.is_ray_regular()) {
    const RayRegular& r = type.ray_regular();
    return {{"kind", "ray-regular"}, {"omega1", r.omega1}, {"samples", r.samples},
            {"t_min", r.t_min}, {"t_max", r.t_max}};
  }
  return {{"kind", "point-irrep"}, {"l", type.point().l}};
}

FieldType type_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ray-irrep") return RayIrrep{j.at("omega1").get<int>(), j.at("omega2").get<double>()};
  if (kind == "ray-regular") {
    return RayRegular{j.at("omega1").get<int>(), j.at("samples").get<int>(), j.at("t_min").get<double>(),
                      j.at("t_max").get<double>()};
  }
  if (kind == "point-irrep") return PointIrrep{j.at("l").get<int>()};
  throw Error(ErrorCode::kParse, "unknown field kind '" + kind + "'");
}

// Sample directions away from the poles so no branch boundary is crossed.
Ray draw_generic_ray(Rng& rng) {
  for (;;) {
    const Ray x = random_ray(rng, 2.0);
    if (std::abs(x.direction().z()) < 0.9) return x;
  }
}

}  // namespace

KernelSupport KernelSupport::make(double d0, double beta0) {
  if (!(d0 >= 0.0) || !(beta0 >= 0.0) || !(beta0 <= std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel support needs d0 >= 0 and 0 <= beta0 <= pi");
  }
  return KernelSupport{d0, beta0};
}

RadialBasis RadialBasis::uniform(double radius, double angular_range) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument, "radial basis needs a finite positive radius");
  }
  RadialBasis b;
  b.centers = linspace(0.0, radius, kRadialCount);
  b.sigma = radius / kRadialCount;
  if (angular_range > 0.0) {
    b.angular_centers = linspace(0.0, angular_range, kAngularCount);
    b.angular_sigma = angular_range / kAngularCount;
  }
  return b;
}

int RadialBasis::size() const {
  return static_cast<int>(centers.size()) * (has_angle() ? static_cast<int>(angular_centers.size()) : 1);
}

Eigen::VectorXd RadialBasis::evaluate(double r, double angle) const {
  Eigen::VectorXd out(size());
  const int na = has_angle() ? static_cast<int>(angular_centers.size()) : 1;
  for (std::size_t a = 0; a < centers.size(); ++a) {
    const double dr = (r - centers[a]) / sigma;
    const double radial = std::exp(-0.5 * dr * dr);
    for (int b = 0; b < na; ++b) {
      double angular = 1.0;
      if (has_angle()) {
        const double db = (angle - angular_centers[b]) / angular_sigma;
        angular = std::exp(-0.5 * db * db);
      }
      out[static_cast<int>(a) * na + b] = radial * angular;
    }
  }
  return out;
}

void RadialBasis::validate() const {
  if (centers.empty() || !(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "radial basis needs centers and sigma > 0");
  if (has_angle() && !(angular_sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "angular sigma must be positive");
}

Complex RadialProfile::operator()(double r, double angle) const {
  if (coeffs.size() != basis.size()) throw Error(ErrorCode::kInvalidArgument, "profile coefficient count mismatch");
  return (coeffs.array() * basis.evaluate(r, angle).cast<Complex>().array()).sum();
}

void KernelEntry::validate() const {
  basis.validate();
  if (in_channels < 1 || out_channels < 1) throw Error(ErrorCode::kInvalidArgument, "kernel entry needs channels");
  if (type_in.is_ray_regular()) throw Error(ErrorCode::kInvalidArgument, "regular inputs are not supported by kernels");
  if (type_in.is_point()) throw Error(ErrorCode::kInvalidArgument, "kernel inputs must be ray types");
  const int expected = type_out.is_point() ? 2 * type_out.point().l + 1 : 1;
  if (components != expected) throw Error(ErrorCode::kInvalidArgument, "kernel entry has the wrong component count");
  if (coeffs.rows() != out_channels * in_channels * components || coeffs.cols() != basis.size()) {
    throw Error(ErrorCode::kInvalidArgument, "kernel coefficient matrix has the wrong shape");
  }
  if (type_out.is_point()) {
    if (!type_in.is_ray_irrep() || !(type_in.ray_irrep() == RayIrrep{})) {
      throw Error(ErrorCode::kInvalidArgument, "ray-to-point kernels need a scalar input type");
    }
    if (coeffs.imag().cwiseAbs().maxCoeff() != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "ray-to-point kernel coefficients must be real");
    }
  }
}

RadialProfile KernelEntry::profile(int out, int in, int component) const {
  return RadialProfile{basis, coeffs.row((out * in_channels + in) * components + component).transpose()};
}

CMat KernelEntry::profile_matrix(double r, double angle, int component) const {
  const CVec values = coeffs * basis.evaluate(r, angle).cast<Complex>();
  CMat out(out_channels, in_channels);
  for (int o = 0; o < out_channels; ++o)
    for (int i = 0; i < in_channels; ++i) out(o, i) = values[(o * in_channels + i) * components + component];
  return out;
}

KernelEntry KernelEntry::random(FieldType type_in, FieldType type_out, int in_channels, int out_channels,
                                RadialBasis basis, Rng& rng) {
  const int components = type_out.is_point() ? 2 * type_out.point().l + 1 : 1;
  const bool real_only = type_out.is_point();
  CMat coeffs(out_channels * in_channels * components, basis.size());
  for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
    for (Eigen::Index c = 0; c < coeffs.cols(); ++c) {
      const double re = rng.uniform(-0.5, 0.5);
      const double im = real_only ? 0.0 : rng.uniform(-0.5, 0.5);
      coeffs(r, c) = Complex(re, im);
    }
  }
  KernelEntry e{std::move(type_in), std::move(type_out), in_channels, out_channels, components, std::move(basis),
                std::move(coeffs)};
  e.validate();
  return e;
}

KernelBank::KernelBank(std::vector<KernelEntry> entries, KernelSupport support)
    : entries_(std::move(entries)), support_(support) {
  for (const KernelEntry& e : entries_) e.validate();
}

const KernelEntry& KernelBank::find(const FieldType& type_in, const FieldType& type_out) const {
  for (const KernelEntry& e : entries_) {
    if (e.type_in == type_in && e.type_out == type_out) return e;
  }
  throw Error(ErrorCode::kMissingBankEntry,
              "no kernel for " + type_in.describe() + " -> " + type_out.describe());
}

const KernelEntry& KernelBank::find_regular(const FieldType& type_in, int omega1_out) const {
  for (const KernelEntry& e : entries_) {
    if (e.type_in == type_in && e.type_out.is_ray_regular() && e.type_out.ray_regular().omega1 == omega1_out) return e;
  }
  std::ostringstream os;
  os << "no kernel for " << type_in.describe() << " -> ray-regular(" << omega1_out << ")";
  throw Error(ErrorCode::kMissingBankEntry, os.str());
}

std::string KernelBank::to_json() const {
  json entries = json::array();
  for (const KernelEntry& e : entries_) {
    std::vector<double> re(e.coeffs.size()), im(e.coeffs.size());
    for (Eigen::Index r = 0, k = 0; r < e.coeffs.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.coeffs.cols(); ++c, ++k) {
        re[k] = e.coeffs(r, c).real();
        im[k] = e.coeffs(r, c).imag();
      }
    }
    json j = {{"type_in", type_to_json(e.type_in)},
              {"type_out", type_to_json(e.type_out)},
              {"in_channels", e.in_channels},
              {"out_channels", e.out_channels},
              {"components", e.components},
              {"centers", e.basis.centers},
              {"sigma", e.basis.sigma},
              {"coeffs_re", re},
              {"coeffs_im", im}};
    if (e.basis.has_angle()) {
      j["angular_centers"] = e.basis.angular_centers;
      j["angular_sigma"] = e.basis.angular_sigma;
    }
    entries.push_back(std::move(j));
  }
  json support = {{"d0", std::isinf(support_.d0) ? json(nullptr) : json(support_.d0)},
                  {"beta0", support_.beta0}};
  return json{{"entries", entries}, {"support", support}}.dump(2);
}

KernelBank KernelBank::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("kernel bank: ") + ex.what());
  }
  std::vector<KernelEntry> entries;
  KernelSupport support;
  std::string where = "support";
  try {
    const json& s = doc.at("support");
    const double d0 = s.at("d0").is_null() ? std::numeric_limits<double>::infinity() : s.at("d0").get<double>();
    support = KernelSupport::make(d0, s.at("beta0").get<double>());
    const json& list = doc.at("entries");
    for (std::size_t n = 0; n < list.size(); ++n) {
      where = "entries[" + std::to_string(n) + "]";
      const json& j = list[n];
      KernelEntry e{type_from_json(j.at("type_in")), type_from_json(j.at("type_out")), j.value("in_channels", 1),
                    j.value("out_channels", 1), j.value("components", 1), RadialBasis{}, CMat{}};
      e.basis.centers = j.at("centers").get<std::vector<double>>();
      e.basis.sigma = j.at("sigma").get<double>();
      if (j.contains("angular_centers")) {
        e.basis.angular_centers = j.at("angular_centers").get<std::vector<double>>();
        e.basis.angular_sigma = j.at("angular_sigma").get<double>();
      }
      const auto re = j.at("coeffs_re").get<std::vector<double>>();
      const auto im = j.at("coeffs_im").get<std::vector<double>>();
      const Eigen::Index rows = static_cast<Eigen::Index>(e.out_channels) * e.in_channels * e.components;
      const Eigen::Index cols = e.basis.size();
      if (static_cast<Eigen::Index>(re.size()) != rows * cols || im.size() != re.size()) {
        throw Error(ErrorCode::kParse, where + ": coefficient arrays have the wrong length");
      }
      e.coeffs.resize(rows, cols);
      for (Eigen::Index r = 0, k = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, ++k) e.coeffs(r, c) = Complex(re[k], im[k]);
      e.validate();
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, where + ": " + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, where + ": " + ex.what());
  }
  return KernelBank(std::move(entries), support);
}

bool at_pole(const Ray& x, int sign) {
  return std::abs(x.direction().z() - (sign > 0 ? 1.0 : -1.0)) < kPoleGuard;
}

double height_g(const Ray& x) {
  if (at_pole(x, 1) || at_pole(x, -1)) {
    throw Error(ErrorCode::kInvalidArgument, "height is undefined for rays parallel to the z-axis");
  }
  const Vec3& d = x.direction();
  return x.foot().z() / (d.x() * d.x() + d.y() * d.y());  // 1 - d_z^2 without cancellation
}

double kernel_radius(const Ray& x) { return ray_distance(origin_ray(), x); }

double kernel_angle(const Ray& x) { return ray_angle(origin_ray(), x); }

Complex rotation_phase(int omega1_in, int omega1_out, const Ray& x) {
  const int sign = at_pole(x, 1) ? 1 : at_pole(x, -1) ? -1 : 0;
  if (sign == 0) {
    return std::polar(1.0, -omega1_out * std::atan2(x.direction().y(), x.direction().x()));
  }
  const int frequency = sign > 0 ? omega1_out - omega1_in : omega1_out + omega1_in;
  if (frequency == 0) return 1.0;
  const Vec3& m = x.moment();
  if (m.norm() < kMomentGuard) return 0.0;
  return std::polar(1.0, -frequency * std::atan2(m.y(), m.x()));
}

Complex translation_phase(double omega2_in, double omega2_out, const Ray& x) {
  if (at_pole(x, 1)) return same_frequency(omega2_out, omega2_in) ? Complex(1.0) : Complex(0.0);
  if (at_pole(x, -1)) return same_frequency(omega2_out, -omega2_in) ? Complex(1.0) : Complex(0.0);
  return std::polar(1.0, -(omega2_out - omega2_in * x.direction().z()) * height_g(x));
}

Complex kappa1(int omega1_in, int omega1_out, const Ray& x, const RadialProfile& profile) {
  return profile(kernel_radius(x), kernel_angle(x)) * rotation_phase(omega1_in, omega1_out, x);
}

Complex kappa2_irrep(double omega2_in, double omega2_out, const Ray& x, const RadialProfile& profile) {
  return profile(kernel_radius(x), kernel_angle(x)) * translation_phase(omega2_in, omega2_out, x);
}

DiracSample kappa2_regular(double omega2_in, const Ray& x, const RadialProfile& profile) {
  if (at_pole(x, 1) || at_pole(x, -1)) return {Complex(0.0), 0.0};
  const double g = height_g(x);
  return {profile(kernel_radius(x), kernel_angle(x)) * std::polar(1.0, omega2_in * x.direction().z() * g), g};
}

Eigen::VectorXd kappa_ray_to_point(int l_out, const Ray& x, const std::vector<RadialProfile>& profiles, double d0) {
  if (l_out < 0) throw Error(ErrorCode::kInvalidArgument, "negative degree");
  if (l_out > 1) throw Error(ErrorCode::kUnsupportedDegree, "ray-to-point kernels support l = 0 and l = 1 only");
  const int components = 2 * l_out + 1;
  if (static_cast<int>(profiles.size()) != components) {
    throw Error(ErrorCode::kInvalidArgument, "ray-to-point kernel needs one profile per component");
  }
  const double r = x.moment().norm();
  if (r > d0) return Eigen::VectorXd::Zero(components);
  if (l_out == 0) return Eigen::VectorXd::Constant(1, profiles[0](r).real());
  const Vec3 out = profiles[0](r).real() * x.direction() + profiles[1](r).real() * x.moment() +
                   profiles[2](r).real() * x.foot();
  return out;
}

CMat ray_kernel_matrix(const KernelEntry& entry, const Ray& z) {
  const RayIrrep& in = entry.type_in.ray_irrep();
  const RayIrrep& out = entry.type_out.ray_irrep();
  const Complex phase = rotation_phase(in.omega1, out.omega1, z) * translation_phase(in.omega2, out.omega2, z);
  if (phase == Complex(0.0)) return CMat::Zero(entry.out_channels, entry.in_channels);
  return entry.profile_matrix(kernel_radius(z), kernel_angle(z)) * phase;
}

RegularKernelValue regular_kernel_matrix(const KernelEntry& entry, const Ray& z) {
  const RayIrrep& in = entry.type_in.ray_irrep();
  const RayRegular& out = entry.type_out.ray_regular();
  RegularKernelValue value{CMat::Zero(entry.out_channels, entry.in_channels), 0.0, false};
  if (at_pole(z, 1) || at_pole(z, -1)) return value;
  const double g = height_g(z);
  const Complex phase =
      rotation_phase(in.omega1, out.omega1, z) * std::polar(1.0, in.omega2 * z.direction().z() * g);
  value.weights = entry.profile_matrix(kernel_radius(z), kernel_angle(z)) * phase;
  value.anchor_param = g;
  value.nonzero = true;
  return value;
}

std::vector<RMat> point_kernel_matrices(const KernelEntry& entry, const Ray& z, double d0) {
  const int l = entry.type_out.point().l;
  const int dim = 2 * l + 1;
  std::vector<RMat> out(dim, RMat::Zero(entry.out_channels, entry.in_channels));
  const double r = z.moment().norm();
  if (r > d0) return out;
  if (l == 0) {
    out[0] = entry.profile_matrix(r, 0.0, 0).real();
    return out;
  }
  const RMat along_d = entry.profile_matrix(r, 0.0, 0).real();
  const RMat along_m = entry.profile_matrix(r, 0.0, 1).real();
  const RMat along_foot = entry.profile_matrix(r, 0.0, 2).real();
  const Vec3 foot = z.foot();
  for (int k = 0; k < 3; ++k) {
    out[k] = along_d * z.direction()[k] + along_m * z.moment()[k] + along_foot * foot[k];
  }
  return out;
}

double verify_kernel_constraint(const KernelUnderTest& kernel, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "n_samples must be positive");
  Rng root(seed);
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    Rng rng = root.split(static_cast<std::uint64_t>(s));
    double residual = 0.0;
    if (const auto* k = std::get_if<RayKernelCheck>(&kernel)) {
      const Ray x = draw_generic_ray(rng);
      const StabilizerElement h = random_stabilizer(rng, 5.0);
      const Ray hx = apply_motion(h.as_motion(), x);
      const StabilizerElement twist = twist_ray(h.as_motion(), x);
      const Complex expected =
          irrep_so2r(k->type_out, h) * k->kernel(x) * irrep_so2r(k->type_in, twist.inverse());
      residual = std::abs(k->kernel(hx) - expected);
    } else if (const auto* k = std::get_if<RegularKernelCheck>(&kernel)) {
      const Ray x = draw_generic_ray(rng);
      const StabilizerElement h = random_stabilizer(rng, 5.0);
      const Ray hx = apply_motion(h.as_motion(), x);
      const StabilizerElement twist = twist_ray(h.as_motion(), x);
      const DiracSample base = k->kernel(x);
      const DiracSample moved = k->kernel(hx);
      const Complex expected = std::polar(1.0, -k->omega1_out * h.gamma()) * base.weight *
                               irrep_so2r(k->type_in, twist.inverse());
      residual = std::abs(moved.weight - expected);
      if (std::abs(base.weight) > 0.0 || std::abs(moved.weight) > 0.0) {
        residual = std::max(residual, std::abs(moved.anchor_param - base.anchor_param - h.tau()));
      }
    } else {
      const auto& point = std::get<PointKernelCheck>(kernel);
      const Ray x = random_ray(rng, 2.0);
      const Mat3 rotation = random_rotation(rng);
      const Ray rx = apply_motion(RigidMotion{rotation, Vec3::Zero()}, x);
      const Eigen::VectorXd expected = wigner_d(point.l_out, rotation) * point.kernel(x);
      residual = (point.kernel(rx) - expected).cwiseAbs().maxCoeff();
    }
    worst = std::max(worst, residual);
  }
  return worst;
}

}  // namespace rayfield
