#pragma once

#include <optional>

#include "copscan/support_field.hpp"

namespace copscan {

// Support-function model of an ovaloid. The origin is expected to lie inside
// the body (h > 0 at the quadrature nodes) for curvature work.
struct Ovaloid {
  SupportField h;
};

struct EllipsoidSpec {
  SphereDim dim{1};
  Eigen::VectorXd semi_axes;  // section_ambient() entries, all > 0
  Eigen::MatrixXd rotation;   // orthogonal, section_ambient() square
  Eigen::VectorXd center;

  static EllipsoidSpec axis_aligned(const SphereDim& dim, const Eigen::VectorXd& lambda);
  void validate() const;
  // Exact support value h(u) = sqrt(sum lambda_i^2 ((R^T u)_i)^2) + u . v.
  double support(const Vec3& u) const;
  // Boundary point with outward normal u (gradient of the support function).
  Vec3 boundary_point(const Vec3& u) const;
};

struct EllipsoidProjection {
  Ovaloid body;
  double projection_residual = 0;  // sup over nodes |h_exact - h_projected|
  bool center_inside = true;       // h > 0 at every node
};

// Band-limit projection of the exact ellipsoid support function.
EllipsoidProjection ellipsoid_support(const EllipsoidSpec& spec, int degree_cap);

// Gamma(u) = grad_S h(u) + h(u) u, the inverse Gauss map.
Vec3 support_parameterization(const SupportField& h, const Vec3& u);

struct OvaloidCheckResult {
  bool ok = false;
  // min over quadrature nodes of the smallest tangential eigenvalue of
  // (Hess h + h id), the reverse Weingarten map.
  double margin = 0;
};
OvaloidCheckResult ovaloid_check(const SupportField& h);

// Sum of principal curvature radii at u: Delta h + (n-2) h with n = d+2.
double curvature_radii_sum(const SupportField& h, const Vec3& u);

struct CentrixReport {
  std::vector<Vec3> values;  // (Gamma(u_i) + Gamma(-u_i)) / 2 at quadrature nodes
  Vec3 mean_center = Vec3::Zero();
  double sup_deviation = 0;
};
CentrixReport centrix(const SupportField& h);
CentrixReport centrix(const SupportField& h, const QuadratureRule& rule);

struct OddEvenParts {
  std::vector<Vec3> even;  // Gamma^+ samples at quadrature nodes
  SupportField h_minus;    // u . Gamma^-(u), support of the recentered body
};
OddEvenParts odd_even_parts(const SupportField& h);

// Max over nodes of the width h(u) + h(-u).
double body_diameter(const SupportField& h);

// Subtract the linear part u . c (exact translation of the body by -c).
SupportField translate_support(const SupportField& h, const Vec3& c);

}  // namespace copscan
