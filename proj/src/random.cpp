#include "rayfield/random.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace rayfield {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::split(std::uint64_t index) const {
  return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

int Rng::uniform_int(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  } while (q.norm() < 1e-6);
  q.normalize();
  return q.toRotationMatrix();
}

RigidMotion random_motion(Rng& rng, double translation_scale) {
  RigidMotion g;
  g.rotation = random_rotation(rng);
  for (int i = 0; i < 3; ++i) g.translation[i] = rng.uniform(-translation_scale, translation_scale);
  return g;
}

Vec3 random_unit_vector(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Ray random_ray(Rng& rng, double extent) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) p[i] = rng.uniform(-extent, extent);
  return ray_through(p, random_unit_vector(rng));
}

StabilizerElement random_stabilizer(Rng& rng, double tau_scale) {
  return StabilizerElement(rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(-tau_scale, tau_scale));
}

int worker_count() {
  if (const char* env = std::getenv("RAYFIELD_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rayfield
