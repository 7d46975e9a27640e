#include "rayfield/lightfield.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rayfield/error.hpp"

namespace rayfield {

namespace {

using nlohmann::json;

constexpr double kOrthoTolerance = 1e-9;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

const json& require(const json& record, const char* key, const std::string& where) {
  if (!record.is_object() || !record.contains(key)) {
    throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  }
  return record.at(key);
}

std::vector<double> numbers(const json& record, const char* key, std::size_t count, const std::string& where) {
  const json& value = require(record, key, where);
  if (!value.is_array() || value.size() != count) {
    std::ostringstream os;
    os << where << ": field '" << key << "' must be an array of " << count << " numbers";
    throw Error(ErrorCode::kParse, os.str());
  }
  std::vector<double> out;
  for (const json& v : value) {
    if (!v.is_number()) throw Error(ErrorCode::kParse, where + ": field '" + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

double number(const json& record, const char* key, const std::string& where) {
  const json& value = require(record, key, where);
  if (!value.is_number()) throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be a number");
  return value.get<double>();
}

int integer(const json& record, const char* key, const std::string& where) {
  const json& value = require(record, key, where);
  if (!value.is_number_integer()) throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be an integer");
  return value.get<int>();
}

}  // namespace

void Camera::validate() const {
  if (!(fov > 0.0 && fov < std::numbers::pi)) throw Error(ErrorCode::kInvalidArgument, "camera fov must lie in (0, pi)");
  if (width < 1 || height < 1) throw Error(ErrorCode::kInvalidArgument, "camera resolution must be positive");
  if ((orientation.transpose() * orientation - Mat3::Identity()).cwiseAbs().maxCoeff() > kOrthoTolerance ||
      std::abs(orientation.determinant() - 1.0) > kOrthoTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "camera orientation must be a rotation");
  }
}

Ray Camera::pixel_ray(int column, int row) const {
  const double focal = 0.5 * width / std::tan(0.5 * fov);
  const Vec3 local((column + 0.5 - 0.5 * width) / focal, (row + 0.5 - 0.5 * height) / focal, 1.0);
  return ray_through(center, orientation * local);
}

Camera look_at(const Vec3& center, const Vec3& target, double fov, int width, int height) {
  const Vec3 offset = target - center;
  if (!(offset.norm() > 0.0)) throw Error(ErrorCode::kInvalidArgument, "camera target coincides with its center");
  const Vec3 forward = offset.normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
  right.normalize();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.center = center;
  cam.orientation.col(0) = right;
  cam.orientation.col(1) = down;
  cam.orientation.col(2) = forward;
  cam.fov = fov;
  cam.width = width;
  cam.height = height;
  cam.validate();
  return cam;
}

std::vector<Camera> make_camera_rig(const RigConfig& config) {
  if (!(config.half_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rig half-width must be positive");
  std::vector<Camera> rig;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 center((corner & 1 ? 1.0 : -1.0) * config.half_width, (corner & 2 ? 1.0 : -1.0) * config.half_width,
                      (corner & 4 ? 1.0 : -1.0) * config.half_width);
    rig.push_back(look_at(center, Vec3::Zero(), config.fov, config.width, config.height));
  }
  return rig;
}

Camera transform_camera(const RigidMotion& g, const Camera& camera) {
  Camera out = camera;
  out.center = apply_motion(g, camera.center);
  out.orientation = g.rotation * camera.orientation;
  return out;
}

void Scene::validate() const {
  for (const Sphere& s : spheres) {
    if (!(s.radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sphere radius must be positive");
    if ((s.albedo.array() < 0.0).any() || (s.albedo.array() > 1.0).any()) {
      throw Error(ErrorCode::kInvalidArgument, "albedo components must lie in [0, 1]");
    }
  }
  if (std::abs(light_direction.norm() - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidArgument, "light direction must be unit");
  if (!(ambient >= 0.0 && ambient <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "ambient must lie in [0, 1]");
}

Scene default_scene() {
  Scene scene;
  scene.spheres = {{Vec3(0.0, 0.0, 0.0), 0.6, Vec3(0.8, 0.3, 0.2)},
                   {Vec3(0.55, 0.4, 0.3), 0.3, Vec3(0.2, 0.7, 0.3)},
                   {Vec3(-0.45, -0.3, 0.4), 0.35, Vec3(0.3, 0.4, 0.9)}};
  scene.light_direction = Vec3(1.0, 1.0, 2.0).normalized();
  scene.ambient = 0.2;
  return scene;
}

Scene random_scene(Rng& rng, int sphere_count) {
  Scene scene;
  for (int k = 0; k < sphere_count; ++k) {
    Sphere s;
    for (int i = 0; i < 3; ++i) {
      s.center[i] = rng.uniform(-0.6, 0.6);
      s.albedo[i] = rng.uniform(0.1, 0.9);
    }
    s.radius = rng.uniform(0.2, 0.5);
    scene.spheres.push_back(s);
  }
  scene.light_direction = random_unit_vector(rng);
  scene.ambient = 0.2;
  return scene;
}

Scene transform_scene(const RigidMotion& g, const Scene& scene) {
  Scene out = scene;
  for (Sphere& s : out.spheres) s.center = apply_motion(g, s.center);
  out.light_direction = g.rotation * scene.light_direction;
  return out;
}

Vec3 trace(const Scene& scene, const Ray& ray) {
  const Vec3 origin = ray.foot();
  const Vec3& d = ray.direction();
  double best = std::numeric_limits<double>::infinity();
  const Sphere* hit = nullptr;
  for (const Sphere& s : scene.spheres) {
    // |origin + t d - c|^2 = r^2 with |d| = 1; the ray is a full line, so both roots count.
    const Vec3 oc = origin - s.center;
    const double b = oc.dot(d);
    const double disc = b * b - (oc.squaredNorm() - s.radius * s.radius);
    if (disc < 0.0) continue;
    const double t = -b - std::sqrt(disc);
    if (t < best) {
      best = t;
      hit = &s;
    }
  }
  if (!hit) return Vec3::Zero();
  const Vec3 normal = (origin + best * d - hit->center) / hit->radius;
  return hit->albedo * (std::max(0.0, normal.dot(scene.light_direction)) + scene.ambient);
}

SampledRayField sample_scene(const Scene& scene, const std::vector<Camera>& cameras) {
  scene.validate();
  std::vector<Ray> rays;
  std::vector<int> views;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    cameras[c].validate();
    for (int row = 0; row < cameras[c].height; ++row) {
      for (int col = 0; col < cameras[c].width; ++col) {
        rays.push_back(cameras[c].pixel_ray(col, row));
        views.push_back(static_cast<int>(c));
      }
    }
  }
  std::vector<Vec3> radiance(rays.size());
  parallel_for(static_cast<int>(rays.size()), [&](int i) { radiance[i] = trace(scene, rays[i]); });
  SampledRayField field(RayIrrep{}, 3);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    field.push_back(rays[i], radiance[i].cast<Complex>(), views[i]);
  }
  return field;
}

LightFieldSample transform_sample(const RigidMotion& g, const LightFieldSample& sample) {
  LightFieldSample out{{}, act_on_ray_field(g, sample.field)};
  for (const Camera& c : sample.cameras) out.cameras.push_back(transform_camera(g, c));
  return out;
}

std::string sample_to_json(const LightFieldSample& sample) {
  if (!(sample.field.type() == FieldType(RayIrrep{})) || sample.field.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "sample files hold 3-channel scalar fields");
  }
  json cameras = json::array();
  for (const Camera& c : sample.cameras) {
    std::vector<double> rot;
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) rot.push_back(c.orientation(r, k));
    cameras.push_back({{"center", vec_json(c.center)},
                       {"rotation_row_major", rot},
                       {"fov", c.fov},
                       {"width", c.width},
                       {"height", c.height}});
  }
  json rays = json::array();
  for (int i = 0; i < sample.field.size(); ++i) {
    const CMat& f = sample.field.values(i);
    rays.push_back({{"d", vec_json(sample.field.ray(i).direction())},
                    {"m", vec_json(sample.field.ray(i).moment())},
                    {"f", json::array({f(0, 0).real(), f(1, 0).real(), f(2, 0).real()})},
                    {"view", sample.field.view(i)}});
  }
  return json{{"cameras", cameras}, {"feature_type", "scalar3"}, {"rays", rays}}.dump();
}

LightFieldSample sample_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("sample: ") + ex.what());
  }
  const json& type = require(doc, "feature_type", "sample");
  if (!type.is_string() || type.get<std::string>() != "scalar3") {
    throw Error(ErrorCode::kParse, "sample: feature_type must be \"scalar3\"");
  }
  LightFieldSample sample{{}, SampledRayField(RayIrrep{}, 3)};
  const json& cameras = require(doc, "cameras", "sample");
  if (!cameras.is_array()) throw Error(ErrorCode::kParse, "sample: cameras must be an array");
  for (std::size_t k = 0; k < cameras.size(); ++k) {
    const std::string where = "cameras[" + std::to_string(k) + "]";
    Camera cam;
    const auto center = numbers(cameras[k], "center", 3, where);
    const auto rot = numbers(cameras[k], "rotation_row_major", 9, where);
    cam.center = Vec3(center[0], center[1], center[2]);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cam.orientation(r, c) = rot[3 * r + c];
    cam.fov = number(cameras[k], "fov", where);
    cam.width = integer(cameras[k], "width", where);
    cam.height = integer(cameras[k], "height", where);
    try {
      cam.validate();
    } catch (const Error& ex) {
      throw Error(ErrorCode::kParse, where + ": " + ex.what());
    }
    sample.cameras.push_back(cam);
  }
  const json& rays = require(doc, "rays", "sample");
  if (!rays.is_array()) throw Error(ErrorCode::kParse, "sample: rays must be an array");
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const std::string where = "rays[" + std::to_string(i) + "]";
    const auto d = numbers(rays[i], "d", 3, where);
    const auto m = numbers(rays[i], "m", 3, where);
    const auto f = numbers(rays[i], "f", 3, where);
    const int view = integer(rays[i], "view", where);
    if (view < -1 || view >= static_cast<int>(sample.cameras.size())) {
      throw Error(ErrorCode::kParse, where + ": view " + std::to_string(view) + " names no camera");
    }
    Ray ray = origin_ray();
    try {
      ray = Ray::make(Vec3(d[0], d[1], d[2]), Vec3(m[0], m[1], m[2]));
    } catch (const Error& ex) {
      throw Error(ErrorCode::kParse, where + ": " + ex.what());
    }
    sample.field.push_back(ray, Vec3(f[0], f[1], f[2]).cast<Complex>(), view);
  }
  return sample;
}

void write_sample(const LightFieldSample& sample, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot open '" + path + "' for writing");
  out << sample_to_json(sample);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "failed writing '" + path + "'");
}

LightFieldSample read_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sample_from_json(buffer.str());
}

}  // namespace rayfield
