#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "copscan/convex_body.hpp"

namespace copscan {

enum class TubeFamily {
  cylinder,
  ellipsoid,
  tube_hyperboloid,
  convex_hyperboloid,
  paraboloid,
  cone,
  twisted,
  bent,
  odd_perturbed,
  affine_image,
};

const char* to_string(TubeFamily f);
TubeFamily tube_family_from_string(const std::string& s);

struct TubeParams {
  Eigen::VectorXd lambda;  // section semi-axes, section_ambient() entries
  std::optional<Eigen::VectorXd> base_coeffs;  // cylinder over a general ovaloid
  double height_axis = 1.0;                    // ellipsoid: semi-axis along e_n
  double b = 1.0;                              // hyperboloid scale
  double offset = 0.0;          // z-shift of the quadric vertex / apex
  double slope = 1.0;           // cone aperture
  double omega = 0.0;           // twist rate
  double amplitude = 0.0;       // odd degree-3 perturbation amplitude
  Vec3 tilt = Vec3::Zero();     // cylinder: center(z) = tilt * z
  Vec3 bend = Vec3::Zero();     // bent: center(z) = bend * z^2
  std::optional<std::pair<double, double>> window;  // overrides the family default
};

// Affine map of the ambient space that preserves horizontal hyperplanes:
//   (x, z) -> (A x + shear * z + offset, z_scale * z + z_shift).
struct SliceAffine {
  Eigen::MatrixXd A;
  Vec3 shear = Vec3::Zero();
  Vec3 offset = Vec3::Zero();
  double z_scale = 1.0;
  double z_shift = 0.0;
};

// Transversely convex tube in standard position, defined by per-height
// generators. section(z) is the origin-centered section support field;
// center(z) the central curve. section_dz is the exact coefficient-level
// z-derivative of section(z).
struct TubeSpec {
  SphereDim dim{1};
  int degree_cap = 32;
  double z_lo = -0.9;
  double z_hi = 0.9;
  TubeFamily family = TubeFamily::cylinder;
  TubeParams params;
  std::shared_ptr<const TubeSpec> affine_base;  // affine_image only
  std::optional<SliceAffine> affine_map;        // affine_image only

  std::function<SupportField(double)> section;
  std::function<SupportField(double)> section_dz;
  std::function<Vec3(double)> center;
  std::function<Vec3(double)> center_dz;
};

TubeSpec generate(const SphereDim& dim, TubeFamily family, const TubeParams& params,
                  int degree_cap);
TubeSpec apply_affine(const TubeSpec& base, const SliceAffine& map);

// Rotation about e3 (d=2) or in the plane (d=1) acting on coefficients;
// rotate_rate is d/dalpha of it.
SupportField rotate_about_axis(const SupportField& f, double alpha);
SupportField rotate_rate_about_axis(const SupportField& f, double alpha);

// Unit-sup-normalized odd degree-3 harmonic used by the odd_perturbed family:
// sup_u |Gamma_g(u)| = 1, so a centrix perturbation of amplitude a moves the
// centrix by a.
SupportField odd_cubic_probe(const SphereDim& dim, int degree_cap);

std::vector<double> uniform_grid(double lo, double hi, int count);

struct invalid_tube_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransverseSupport {
  SphereDim dim{1};
  int degree_cap = 32;
  std::vector<double> z_grid;
  std::vector<SupportField> fields;     // recentered section support per height
  std::vector<SupportField> dz_fields;  // d/dz of fields (analytic or FD)
  bool analytic_dz = false;
  std::vector<Vec3> centers;            // centrix means per height
  std::vector<double> section_margins;  // ovaloid_check margin per height
  std::shared_ptr<const TubeSpec> source;  // continuous-z evaluation for slicing
  double gamma_dz_bound = 0;            // sup |dGamma/dz| over grid and nodes

  int n_ambient() const { return dim.tube_ambient(); }
  int index_nearest(double z) const;
};

// Extracts centered section support fields over the grid. Every section must
// pass ovaloid_check; the failing height is named otherwise.
TransverseSupport transverse_support(const TubeSpec& t, const std::vector<double>& z_grid,
                                     int degree_cap);
TransverseSupport transverse_support(const TubeSpec& t, int grid_count = 33);

struct SplitResult {
  Eigen::VectorXd r;    // per-height homothety factor, r(anchor) = 1
  SupportField h0;      // section field at the height nearest 0
  double residual = 0;  // max_k sup_u |h(u,z_k) - r_k h0(u)| / sup |h0|
  int anchor = 0;
};
SplitResult split_test(const TransverseSupport& ts);

}  // namespace copscan
