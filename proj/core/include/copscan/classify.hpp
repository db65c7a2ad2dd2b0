#pragma once

#include <optional>
#include <string>

#include "copscan/obstruction.hpp"
#include "copscan/slicing.hpp"

namespace copscan {

enum class QuadricKind { ellipsoid, tube_hyperboloid, convex_hyperboloid, cone, paraboloid };
const char* to_string(QuadricKind k);

enum class VerdictKind { CylinderOverCentralOvaloid, Quadric, NotCop };
const char* to_string(VerdictKind k);

struct not_a_quadric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassifierConfig {
  int degree_cap = 0;  // 0: use the tube's cap (default 32; 64 recommended for d=1)
  int grid_count = 33;
  int tau_sweep = 16;
  std::uint64_t seed = 0x5eed5eedULL;
  double centrality_rel_tol = 1e-6;  // x section diameter
  double obstruction_tol = 1e-5;     // relative f_tau / V / S
  double axis_tol = 1e-6;            // relative second difference
  double split_tol = 1e-5;           // relative split residual
  double cylinder_tol = 1e-6;        // max |r - 1|
  double ellipsoid_tol = 1e-5;       // gradient_rel and fit residual
  double quadric_fit_tol = 1e-6;     // relative r^2 quadratic fit residual
  double cone_touch_tol = 1e-6;      // |min r^2| treated as touching zero

  void validate() const;
};

struct QuadraticFit {
  double a = 0, b = 0, c = 0;  // r^2(z) ~ a z^2 + b z + c
  double residual = 0;         // relative sup misfit over the grid
};

// Names the quadric family from the quadratic profile of r^2 over the height
// window; throws not_a_quadric_error when the fit residual is too large.
QuadricKind quadric_family(const QuadraticFit& fit, std::pair<double, double> window,
                           const ClassifierConfig& cfg);

struct Certificates {
  double max_section_centrality_rel = 0;
  double pde1_rel = 0;
  double pde2_rel = 0;
  double obstruction_max_rel = 0;
  double split_residual = 0;
  double max_r_deviation_from_1 = 0;
  std::optional<EllipsoidTestReport> ellipsoid;
  std::optional<AffineTestReport> axis;
  std::optional<QuadraticFit> r2_fit;
  double family_margin = 0;  // |min r^2| distance from the cone boundary
};

struct Witness {
  std::string stage;  // "section_centrality" | "obstruction" | "axis"
  Vec3 tau = Vec3::UnitX();
  double z = 0;
  Vec3 u = Vec3::UnitX();
  double magnitude = 0;
};

struct Classification {
  VerdictKind verdict = VerdictKind::NotCop;
  std::optional<QuadricKind> quadric;
  Certificates certificates;
  std::optional<Witness> witness;
  int ambient_dimension = 3;  // n, reported alongside the verdict
  std::string detail;

  bool is_cop() const { return verdict != VerdictKind::NotCop; }
};

Classification classify(const TubeSpec& tube, const ClassifierConfig& cfg = {});

}  // namespace copscan
