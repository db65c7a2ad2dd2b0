#pragma once

#include <cstdint>

#include "copscan/tube.hpp"

namespace copscan {

// Residual fields live on the interior heights of the grid (indices 2..K-3,
// where the z-difference stencil fits). Relative norms divide by the
// per-height scale sup|h| * sup|Delta h + (n-2) h|, which is positive for
// any ovaloid section.
struct GridScalarField {
  std::vector<int> z_index;
  std::vector<std::vector<double>> values;  // [interior height][node]
  double rel_sup = 0;
};
struct GridVectorField {
  std::vector<int> z_index;
  std::vector<std::vector<Vec3>> values;
  double rel_sup = 0;
};

// PDE (radial bracket): h d/dz[Delta h + (n-2)h] - [Delta h + (n-2)h] dh/dz.
GridScalarField pde2_residual(const TransverseSupport& ts);

// PDE (tangential bracket):
//   h_z grad[Delta h + (n-2)h] + d/dz[Delta h + (n-2)h] grad h
//   + 2 ( h grad h_z + Hess_h(grad h_z) ).
GridVectorField pde1_residual(const TransverseSupport& ts);

struct ObstructionField {
  Vec3 tau = Vec3::UnitX();
  std::vector<int> z_index;
  std::vector<std::vector<double>> f_tau;  // tau^T . V + (tau . u) S
  double rel_sup = 0;
};
ObstructionField assemble_obstruction(const GridVectorField& V, const GridScalarField& S,
                                      const TransverseSupport& ts, const Vec3& tau);

struct ObstructionWitness {
  Vec3 tau = Vec3::UnitX();
  double z = 0;
  Vec3 u = Vec3::UnitX();
  double magnitude = 0;  // relative |f_tau| at the witness point
};
struct ObstructionSweep {
  std::vector<Vec3> taus;
  std::vector<double> rel_sups;
  double max_rel = 0;
  ObstructionWitness witness;
};
ObstructionSweep sweep_obstruction(const GridVectorField& V, const GridScalarField& S,
                                   const TransverseSupport& ts, const std::vector<Vec3>& taus);

// Deterministic tilt-direction sweep (uniform circle / Fibonacci sphere,
// rotated by a seed-derived phase).
std::vector<Vec3> tau_directions(const SphereDim& dim, int count, std::uint64_t seed);

struct QSquaredReport {
  SupportField q2;         // projection of (Delta h + (n-2)h)/h at the anchor height
  double z_variation = 0;  // sup over nodes of the height spread, / sup |ratio|
};
QSquaredReport q_squared(const TransverseSupport& ts);

struct inconsistency_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EllipsoidTestReport {
  double constant_value = 0;  // mean of F = Delta h^2 + 2(n-1) h^2
  double gradient_sup = 0;    // sup |grad F| over nodes
  double gradient_rel = 0;    // gradient_sup / |constant_value|
  Eigen::MatrixXd B;          // quadratic form fitted to h^2
  Eigen::VectorXd semi_axes;
  Eigen::MatrixXd principal_axes;
  double fit_residual = 0;  // sup |h^2 - u^T B u| / sup h^2
  bool accepted = false;
};
// Lemma test: h is the support function of an origin-centered ellipsoid iff
// grad F vanishes; the fitted B recovers the squared semi-axes.
EllipsoidTestReport ellipsoid_criterion(const SupportField& h0, double tol = 1e-5);

struct AffineTestReport {
  double max_second_difference = 0;  // |c(z+dz) - 2 c(z) + c(z-dz)| / dz^2
  double rel = 0;                    // divided by the diameter scale
  bool is_affine = false;
  Vec3 line_base = Vec3::Zero();  // least-squares line c(z) ~ base + dir z
  Vec3 line_dir = Vec3::Zero();
  int argmax_index = 0;
  Vec3 argmax_direction = Vec3::Zero();
};
AffineTestReport affine_test(const std::vector<Vec3>& centers,
                             const std::vector<double>& z_grid, double tol,
                             double diameter_scale);

}  // namespace copscan
