#pragma once

#include <string>
#include <vector>

#include "rayfield/random.hpp"
#include "rayfield/representations.hpp"

namespace rayfield {

/// Pinhole camera. Orientation columns are the camera axes in world
/// coordinates: x to the right, y down, z along the optical axis. fov is the
/// horizontal field of view.
struct Camera {
  Vec3 center = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
  double fov = 1.0;
  int width = 16;
  int height = 16;

  /// Validates 0 < fov < pi, positive resolution and an orthonormal orientation.
  void validate() const;

  /// Ray through the center of pixel (column, row).
  Ray pixel_ray(int column, int row) const;
};

/// Camera at `center` looking at `target`. Roll: world +z projected into the
/// image plane points up; +x is used when the optical axis is parallel to z.
Camera look_at(const Vec3& center, const Vec3& target, double fov, int width, int height);

struct RigConfig {
  double half_width = 2.0;
  double fov = 0.9;
  int width = 16;
  int height = 16;
};

/// Eight cameras on the corners of the cube [-h, h]^3, all aimed at the origin.
std::vector<Camera> make_camera_rig(const RigConfig& config);

Camera transform_camera(const RigidMotion& g, const Camera& camera);

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 albedo = Vec3::Ones();
};

struct Scene {
  std::vector<Sphere> spheres;
  Vec3 light_direction = Vec3::UnitZ();  // unit vector toward the light
  double ambient = 0.2;

  void validate() const;
};

/// Three spheres around the origin with a fixed light.
Scene default_scene();

/// Spheres with random centers, radii and albedos inside the rig.
Scene random_scene(Rng& rng, int sphere_count);

Scene transform_scene(const RigidMotion& g, const Scene& scene);

/// Radiance along one ray: Lambert plus ambient on the first sphere hit, black otherwise.
Vec3 trace(const Scene& scene, const Ray& ray);

/// One 3-channel scalar sample per pixel, cameras in order, pixels row-major.
/// View ids are camera indices.
SampledRayField sample_scene(const Scene& scene, const std::vector<Camera>& cameras);

/// Sampled light field together with the cameras that produced it.
struct LightFieldSample {
  std::vector<Camera> cameras;
  SampledRayField field;
};

/// Moves rays and cameras by g; values twisted per their type (unchanged for scalars).
LightFieldSample transform_sample(const RigidMotion& g, const LightFieldSample& sample);

/// JSON text of a scalar3 sample. Doubles round-trip exactly.
std::string sample_to_json(const LightFieldSample& sample);

/// Throws Error(kParse) naming the offending record, e.g. "rays[12]: missing field 'm'".
LightFieldSample sample_from_json(const std::string& text);

void write_sample(const LightFieldSample& sample, const std::string& path);
LightFieldSample read_sample(const std::string& path);

}  // namespace rayfield
