#pragma once

#include "copscan/tube.hpp"

namespace copscan {

// Hyperplane {(p, z) : z = eps (p . tau) + z0} probing the tube near height z0.
struct TiltedPlane {
  Vec3 tau = Vec3::UnitX();  // unit tilt direction in the section space
  double z0 = 0;
  double eps = 0;
};

struct tilt_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct section_not_ovaloid_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed point of z -> z0 + eps tau . Gamma(u, z); Gamma includes the center.
// Throws tilt_error when |eps| violates the contraction guard or the iterate
// leaves the height range.
double solve_height(const TransverseSupport& ts, const TiltedPlane& plane, const Vec3& u);

// d z / d eps at eps = 0, equal to tau . Gamma(u, z0).
double height_eps_slope(const TransverseSupport& ts, const Vec3& tau, double z0, const Vec3& u);

struct SectionReport {
  TiltedPlane plane;
  // Per quadrature node w: the support direction data of the projected
  // section. theta_eps[w] is the parameter point u*(w) whose image has
  // outward normal w; points/heights are Gamma(u*, z(eps,u*)) and z(eps,u*).
  std::vector<Vec3> theta_eps;
  std::vector<Vec3> points;
  std::vector<double> heights;
  SupportField h_eps{SphereDim(1), 0};  // support of the projected section minus center
  std::vector<Vec3> centrix_values;
  Vec3 center = Vec3::Zero();
  double sup_deviation = 0;
  double diameter = 0;
};

SectionReport cross_section(const TransverseSupport& ts, const TiltedPlane& plane);

// Finite-difference derivative of the tilted-section centrix at eps = 0,
// sampled per quadrature node; the independent oracle for the closed form.
std::vector<Vec3> centrix_eps_derivative(const TransverseSupport& ts, const Vec3& tau,
                                         double z0, double eps_step,
                                         bool richardson = false);

// Closed-form derivative assembled from h, h_z, and the central curve:
//   h_z (u) [ (Hess h + h id) tau^T(u) ] + [tau . c] c' + [tau . Gamma^-] dGamma^-/dz.
std::vector<Vec3> centrix_derivative_closed_form(const TransverseSupport& ts, const Vec3& tau,
                                                 double z0);

// Spectral divergence of an ambient-vector field sampled at the rule nodes.
std::vector<double> spherical_divergence(const SphereDim& dim, int degree_cap,
                                         const QuadratureRule& rule,
                                         const std::vector<Vec3>& field);

}  // namespace copscan
