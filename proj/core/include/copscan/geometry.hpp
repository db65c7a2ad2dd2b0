#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace copscan {

// Directions and points of the cross-section space live in at most R^3
// (d=1: circle in R^2, third component fixed to zero; d=2: sphere in R^3).
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// d = intrinsic dimension of the parameter sphere S^d.
// Cross sections are hypersurfaces of R^{d+1}; the tube lives in R^{d+2}.
struct SphereDim {
  int d = 1;

  explicit SphereDim(int d_) : d(d_) {
    if (d != 1 && d != 2) throw std::invalid_argument("SphereDim: d must be 1 or 2");
  }
  int section_ambient() const { return d + 1; }  // n - 1
  int tube_ambient() const { return d + 2; }     // n
  double sphere_area() const { return d == 1 ? 2.0 * M_PI : 4.0 * M_PI; }
};

inline void require_unit(const Vec3& u, double tol = 1e-12) {
  if (std::abs(u.norm() - 1.0) > tol)
    throw std::domain_error("expected a unit vector, |u| = " + std::to_string(u.norm()));
}

// Orthonormal tangent basis at u. For d=1 only the first vector is meaningful
// (the counterclockwise unit tangent in the plane).
inline void tangent_basis(const SphereDim& dim, const Vec3& u, Vec3& e1, Vec3& e2) {
  if (dim.d == 1) {
    e1 = Vec3(-u.y(), u.x(), 0.0);
    e2 = Vec3::Zero();
    return;
  }
  Vec3 a = std::abs(u.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  e1 = (a - a.dot(u) * u).normalized();
  e2 = u.cross(e1);
}

inline Vec3 tangent_project(const Vec3& u, const Vec3& v) { return v - v.dot(u) * u; }

// Deterministic parallel map: fn(i) for i in [0, n). Each index writes its own
// slot in caller-owned storage, so results are identical to the serial order.
// COPSCAN_THREADS caps the worker count.
inline unsigned max_threads() {
  if (const char* env = std::getenv("COPSCAN_THREADS")) {
    long v = std::atol(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned workers = std::min<std::size_t>(max_threads(), n);
  if (workers <= 1 || n < 4) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace copscan
