#include "rayfield/conv.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "rayfield/error.hpp"
#include "rayfield/random.hpp"

namespace rayfield {

namespace {

constexpr double kCenterTolerance = 1e-9;
constexpr double kRealTolerance = 1e-12;

Complex input_twist(const FieldType& type, const RigidMotion& to_query_frame, const Ray& y) {
  const RayIrrep& in = type.ray_irrep();
  if (in.omega1 == 0 && in.omega2 == 0.0) return 1.0;
  return irrep_so2r(in, twist_ray(to_query_frame, y));
}

}  // namespace

int nearest_anchor(const std::vector<double>& params, double t) {
  const int n = static_cast<int>(params.size());
  if (n == 1) return 0;
  const double low = params.front() - 0.5 * (params[1] - params[0]);
  const double high = params.back() + 0.5 * (params[n - 1] - params[n - 2]);
  if (t < low || t > high) return -1;
  const auto it = std::lower_bound(params.begin(), params.end(), t);
  if (it == params.begin()) return 0;
  if (it == params.end()) return n - 1;
  const int upper = static_cast<int>(it - params.begin());
  return t - params[upper - 1] <= params[upper] - t ? upper - 1 : upper;
}

std::vector<int> neighborhood(const SampledRayField& field, const Ray& query, const KernelSupport& support) {
  std::vector<int> out;
  for (int i = 0; i < field.size(); ++i) {
    if (ray_angle(query, field.ray(i)) <= support.beta0 && ray_distance(query, field.ray(i)) <= support.d0) {
      out.push_back(i);
    }
  }
  return out;
}

Feature conv_ray_to_ray(const SampledRayField& field, const KernelBank& bank, const Ray& query,
                        const FieldType& type_out) {
  const KernelEntry& entry = bank.find(field.type(), type_out);
  if (!type_out.is_ray_irrep()) {
    throw Error(ErrorCode::kInvalidArgument, "conv_ray_to_ray produces ray-irrep outputs");
  }
  const RigidMotion to_frame = invert(section_ray(query));
  CMat out = CMat::Zero(entry.out_channels, 1);
  for (int i : neighborhood(field, query, bank.support())) {
    const Ray& y = field.ray(i);
    const Ray z = apply_motion(to_frame, y);
    const CMat k = ray_kernel_matrix(entry, z);
    out += k * (input_twist(field.type(), to_frame, y) * field.values(i));
  }
  return Feature(type_out, out);
}

std::vector<Feature> conv_ray_to_ray(const SampledRayField& field, const KernelBank& bank,
                                     const std::vector<Ray>& queries, const FieldType& type_out) {
  std::vector<std::optional<Feature>> slots(queries.size());
  parallel_for(static_cast<int>(queries.size()),
               [&](int q) { slots[q] = conv_ray_to_ray(field, bank, queries[q], type_out); });
  std::vector<Feature> out;
  out.reserve(queries.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Feature conv_ray_to_point(const SampledRayField& field, const KernelBank& bank, const Vec3& p, int l_out) {
  if (!(field.type() == FieldType(RayIrrep{}))) {
    throw Error(ErrorCode::kInvalidArgument, "ray-to-point convolution needs a scalar ray field, got " +
                                                 field.type().describe());
  }
  const FieldType type_out(PointIrrep{l_out});
  const KernelEntry& entry = bank.find(field.type(), type_out);
  const double d0 = bank.support().d0;
  const int dim = 2 * l_out + 1;
  RMat out = RMat::Zero(entry.out_channels, dim);
  for (int i = 0; i < field.size(); ++i) {
    const Ray& y = field.ray(i);
    const CMat& f = field.values(i);
    if (f.imag().cwiseAbs().maxCoeff() > kRealTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "ray-to-point convolution needs real input values");
    }
    const Ray z = Ray::unchecked(y.direction(), y.moment() - p.cross(y.direction()));
    if (z.moment().norm() > d0) continue;
    const std::vector<RMat> k = point_kernel_matrices(entry, z, d0);
    const Eigen::VectorXd real_f = f.real().col(0);
    for (int c = 0; c < dim; ++c) out.col(c) += k[c] * real_f;
  }
  return Feature(type_out, out.cast<Complex>());
}

SampledPointField conv_ray_to_point(const SampledRayField& field, const KernelBank& bank,
                                    const std::vector<Vec3>& points, int l_out) {
  std::vector<RMat> values(points.size());
  parallel_for(static_cast<int>(points.size()),
               [&](int q) { values[q] = conv_ray_to_point(field, bank, points[q], l_out).values.real(); });
  const int channels = values.empty() ? bank.find(field.type(), FieldType(PointIrrep{l_out})).out_channels
                                      : static_cast<int>(values.front().rows());
  SampledPointField out(l_out, channels);
  for (std::size_t q = 0; q < points.size(); ++q) out.push_back(points[q], values[q]);
  return out;
}

AnchoredSamples conv_ray_to_ray_regular(const SampledRayField& field, const KernelBank& bank, const Ray& query,
                                        int omega1_out, const std::vector<Vec3>& anchors) {
  const KernelEntry& entry = bank.find_regular(field.type(), omega1_out);
  AnchoredSamples shell(query, anchors, omega1_out, CMat::Zero(entry.out_channels, anchors.size()));
  const std::vector<double> params = shell.params();
  const RigidMotion to_frame = invert(section_ray(query));
  CMat out = CMat::Zero(entry.out_channels, static_cast<Eigen::Index>(anchors.size()));
  for (int i : neighborhood(field, query, bank.support())) {
    const Ray& y = field.ray(i);
    const Ray z = apply_motion(to_frame, y);
    const RegularKernelValue k = regular_kernel_matrix(entry, z);
    if (!k.nonzero) continue;
    const int bin = nearest_anchor(params, k.anchor_param);
    if (bin < 0) continue;
    out.col(bin) += k.weights * (input_twist(field.type(), to_frame, y) * field.values(i));
  }
  return AnchoredSamples(query, anchors, omega1_out, out);
}

Feature spherical_conv_intra_view(const SampledRayField& field, const Vec3& center, const KernelBank& bank,
                                  const Vec3& query_direction, const FieldType& type_out) {
  const RayIrrep& in = field.type().ray_irrep();
  const RayIrrep& out_type = type_out.ray_irrep();
  if (in.omega2 != 0.0 || out_type.omega2 != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "spherical convolution needs zero translation frequencies");
  }
  for (int i = 0; i < field.size(); ++i) {
    const Ray& y = field.ray(i);
    if ((y.moment() - center.cross(y.direction())).norm() > kCenterTolerance) {
      std::ostringstream os;
      os << "ray " << i << " does not pass through the camera center";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
  const KernelEntry& entry = bank.find(field.type(), type_out);
  const Vec3 dq = query_direction.normalized();
  const Mat3 to_frame = section_sphere(dq).transpose();
  CMat out = CMat::Zero(entry.out_channels, 1);
  for (int i = 0; i < field.size(); ++i) {
    const Vec3& dy = field.ray(i).direction();
    if (ray_angle(Ray::unchecked(dq, Vec3::Zero()), Ray::unchecked(dy, Vec3::Zero())) > bank.support().beta0) continue;
    const Vec3 u = to_frame * dy;
    const CMat k = ray_kernel_matrix(entry, Ray::unchecked(u, Vec3::Zero()));
    const Complex twist = std::polar(1.0, -in.omega1 * twist_sphere(to_frame, dy));
    out += k * (twist * field.values(i));
  }
  return Feature(type_out, out);
}

}  // namespace rayfield
