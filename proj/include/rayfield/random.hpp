#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "rayfield/group_theory.hpp"
#include "rayfield/ray_geometry.hpp"

namespace rayfield {

/// Deterministic generator. Streams are derived with split() so parallel
/// trials draw the same numbers regardless of thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent child stream keyed by (seed, index).
  Rng split(std::uint64_t index) const;

  double uniform(double lo, double hi);
  double normal();
  int uniform_int(int lo, int hi);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Haar-distributed rotation (normalized quaternion from four Gaussians).
Mat3 random_rotation(Rng& rng);

/// Random rotation with translation components uniform in [-scale, scale].
RigidMotion random_motion(Rng& rng, double translation_scale);

Vec3 random_unit_vector(Rng& rng);

/// Ray through a point in [-extent, extent]^3 with a uniform direction.
Ray random_ray(Rng& rng, double extent);

StabilizerElement random_stabilizer(Rng& rng, double tau_scale);

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Exceptions from any worker are rethrown on the caller's thread.
void parallel_for(int count, const std::function<void(int)>& body);

/// Worker count: RAYFIELD_THREADS when set, otherwise hardware concurrency.
int worker_count();

}  // namespace rayfield
