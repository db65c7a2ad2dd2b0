#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copscan/geometry.hpp"

namespace copscan {

// Quadrature on S^1 or S^2, exact for products of basis elements up to
// degree 2L. d=1: 2L+2 uniform nodes; d=2: (L+1) Gauss-Legendre latitudes
// times (2L+2) uniform longitudes.
struct QuadratureRule {
  SphereDim dim{1};
  int degree_cap = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

QuadratureRule quadrature_rule(const SphereDim& dim, int degree_cap);

// Band-limited scalar field on S^1 or S^2.
//
// d=1 coefficient order: [a0, a1, b1, ..., aL, bL] for
//   f(theta) = a0 + sum_m (a_m cos m theta + b_m sin m theta).
// d=2 coefficient order: l ascending, m = -l..l, real orthonormal harmonics
//   Y_{l,0}   = Nbar_l0 P_l(z)
//   Y_{l,m>0} = sqrt(2) Nbar_lm P_l^m(z) cos(m phi)
//   Y_{l,m<0} = sqrt(2) Nbar_l|m| P_l^|m|(z) sin(|m| phi)
// with P_l^m in the std::assoc_legendre convention (no Condon-Shortley phase)
// and Nbar_lm = sqrt((2l+1)(l-m)! / (4 pi (l+m)!)).
class SupportField {
 public:
  SupportField(SphereDim dim, int degree_cap)
      : dim_(dim),
        degree_cap_(degree_cap),
        coeffs_(Eigen::VectorXd::Zero(coeff_count(dim, degree_cap))) {
    if (degree_cap < 0) throw std::invalid_argument("SupportField: negative degree cap");
  }
  SupportField(SphereDim dim, int degree_cap, Eigen::VectorXd coeffs)
      : dim_(dim), degree_cap_(degree_cap), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != coeff_count(dim, degree_cap))
      throw std::invalid_argument("SupportField: coefficient count mismatch");
  }

  static int coeff_count(const SphereDim& dim, int L) {
    return dim.d == 1 ? 2 * L + 1 : (L + 1) * (L + 1);
  }
  static SupportField constant(SphereDim dim, int L, double value);
  // Field u -> u . v (degree-1 content only).
  static SupportField linear(SphereDim dim, int L, const Vec3& v);

  const SphereDim& dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  // d=1: index of a_m / b_m; d=2: index of c_{l,m}.
  static int index_d1(int m, bool sine) { return m == 0 ? 0 : 2 * m - 1 + (sine ? 1 : 0); }
  static int index_d2(int l, int m) { return l * l + l + m; }

  int degree_of_index(int k) const;

  SupportField& operator+=(const SupportField& o);
  SupportField& operator-=(const SupportField& o);
  SupportField& operator*=(double s);
  friend SupportField operator+(SupportField a, const SupportField& b) { return a += b; }
  friend SupportField operator-(SupportField a, const SupportField& b) { return a -= b; }
  friend SupportField operator*(double s, SupportField a) { return a *= s; }

 private:
  SphereDim dim_;
  int degree_cap_;
  Eigen::VectorXd coeffs_;
};

// Pointwise evaluation sum_k c_k basis_k(u). Requires |u| = 1 within 1e-12.
double synthesize(const SupportField& f, const Vec3& u);
std::vector<double> synthesize(const SupportField& f, const std::vector<Vec3>& us);

// Exact projection of samples taken at quadrature_rule(dim, L).nodes.
SupportField analyze(const SphereDim& dim, int degree_cap, const std::vector<double>& samples);
SupportField analyze(const SphereDim& dim, int degree_cap, const std::vector<double>& samples,
                     const QuadratureRule& rule);

// Diagonal spectral operator: circle mode m scales by -m^2, spherical degree
// l by -l(l+1).
SupportField laplace_beltrami(const SupportField& f);

// Tangential part of the ambient gradient of any smooth extension; orthogonal
// to u by construction.
Vec3 surface_gradient(const SupportField& f, const Vec3& u);

// Intrinsic covariant Hessian applied to a tangent vector X at u.
Vec3 hessian_apply(const SupportField& f, const Vec3& u, const Vec3& X);

// Value, surface gradient, and covariant Hessian (as a matrix acting on the
// tangent space, ambient coordinates) in one pass.
struct FieldJet {
  double value = 0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();  // P H P - nu P restricted to tangent vectors
};
FieldJet field_jet(const SupportField& f, const Vec3& u);

// Batch evaluation at the nodes of a rule produced by quadrature_rule();
// shares the latitude recurrences across each ring of constant z.
enum class JetLevel { value, gradient, hessian };
struct NodeJets {
  std::vector<double> values;
  std::vector<Vec3> gradients;   // surface gradients (empty at JetLevel::value)
  std::vector<Mat3> hessians;    // covariant Hessian ops (JetLevel::hessian only)
};
NodeJets node_jets(const SupportField& f, const QuadratureRule& rule, JetLevel level);

// Index of -u within the same rule's node list.
std::size_t antipode_index(const QuadratureRule& rule, std::size_t i);

}  // namespace copscan
