#include "copscan/convex_body.hpp"

#include <cmath>

namespace copscan {

EllipsoidSpec EllipsoidSpec::axis_aligned(const SphereDim& dim, const Eigen::VectorXd& lambda) {
  EllipsoidSpec spec;
  spec.dim = dim;
  spec.semi_axes = lambda;
  int m = dim.section_ambient();
  spec.rotation = Eigen::MatrixXd::Identity(m, m);
  spec.center = Eigen::VectorXd::Zero(m);
  return spec;
}

void EllipsoidSpec::validate() const {
  int m = dim.section_ambient();
  if (semi_axes.size() != m || rotation.rows() != m || rotation.cols() != m ||
      center.size() != m)
    throw std::invalid_argument("EllipsoidSpec: dimension mismatch");
  if ((semi_axes.array() <= 0).any())
    throw std::invalid_argument("EllipsoidSpec: semi-axes must be positive");
  double orth = (rotation.transpose() * rotation - Eigen::MatrixXd::Identity(m, m))
                    .cwiseAbs()
                    .maxCoeff();
  if (orth > 1e-12) throw std::invalid_argument("EllipsoidSpec: rotation is not orthogonal");
}

double EllipsoidSpec::support(const Vec3& u) const {
  int m = dim.section_ambient();
  Eigen::VectorXd uu = rotation.transpose() * u.head(m);
  double s = (semi_axes.array().square() * uu.array().square()).sum();
  return std::sqrt(s) + center.dot(u.head(m));
}

Vec3 EllipsoidSpec::boundary_point(const Vec3& u) const {
  int m = dim.section_ambient();
  Eigen::VectorXd uu = rotation.transpose() * u.head(m);
  double h0 = std::sqrt((semi_axes.array().square() * uu.array().square()).sum());
  Eigen::VectorXd g = rotation * (semi_axes.array().square() * uu.array()).matrix() / h0;
  Vec3 out = Vec3::Zero();
  out.head(m) = g + center;
  return out;
}

EllipsoidProjection ellipsoid_support(const EllipsoidSpec& spec, int degree_cap) {
  spec.validate();
  QuadratureRule rule = quadrature_rule(spec.dim, degree_cap);
  std::vector<double> samples(rule.size());
  bool inside = true;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    samples[i] = spec.support(rule.nodes[i]);
    if (samples[i] <= 0) inside = false;
  }
  EllipsoidProjection out{Ovaloid{analyze(spec.dim, degree_cap, samples, rule)}, 0.0, inside};
  NodeJets jets = node_jets(out.body.h, rule, JetLevel::value);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double err = std::abs(jets.values[i] - samples[i]);
    out.projection_residual = std::max(out.projection_residual, err);
  }
  return out;
}

Vec3 support_parameterization(const SupportField& h, const Vec3& u) {
  return surface_gradient(h, u) + synthesize(h, u) * u;
}

OvaloidCheckResult ovaloid_check(const SupportField& h) {
  QuadratureRule rule = quadrature_rule(h.dim(), h.degree_cap());
  NodeJets jets = node_jets(h, rule, JetLevel::hessian);
  std::vector<double> mins(rule.size());
  parallel_for(rule.size(), [&](std::size_t i) {
    const Vec3& u = rule.nodes[i];
    Vec3 e1, e2;
    tangent_basis(h.dim(), u, e1, e2);
    const Mat3& H = jets.hessians[i];
    if (h.dim().d == 1) {
      mins[i] = e1.dot(H * e1) + jets.values[i];
    } else {
      Eigen::Matrix2d W;
      W(0, 0) = e1.dot(H * e1) + jets.values[i];
      W(1, 1) = e2.dot(H * e2) + jets.values[i];
      W(0, 1) = W(1, 0) = 0.5 * (e1.dot(H * e2) + e2.dot(H * e1));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(W);
      mins[i] = es.eigenvalues().minCoeff();
    }
  });
  OvaloidCheckResult res;
  res.margin = mins.empty() ? 0.0 : *std::min_element(mins.begin(), mins.end());
  res.ok = res.margin > 0;
  return res;
}

double curvature_radii_sum(const SupportField& h, const Vec3& u) {
  int n = h.dim().tube_ambient();
  return synthesize(laplace_beltrami(h), u) + (n - 2) * synthesize(h, u);
}

CentrixReport centrix(const SupportField& h, const QuadratureRule& rule) {
  CentrixReport rep;
  rep.values.resize(rule.size());
  NodeJets jets = node_jets(h, rule, JetLevel::gradient);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    std::size_t j = antipode_index(rule, i);
    Vec3 gi = jets.gradients[i] + jets.values[i] * rule.nodes[i];
    Vec3 gj = jets.gradients[j] + jets.values[j] * rule.nodes[j];
    rep.values[i] = 0.5 * (gi + gj);
  }
  double wsum = 0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    acc += rule.weights[i] * rep.values[i];
    wsum += rule.weights[i];
  }
  rep.mean_center = acc / wsum;
  for (const Vec3& v : rep.values)
    rep.sup_deviation = std::max(rep.sup_deviation, (v - rep.mean_center).norm());
  return rep;
}

CentrixReport centrix(const SupportField& h) {
  return centrix(h, quadrature_rule(h.dim(), h.degree_cap()));
}

OddEvenParts odd_even_parts(const SupportField& h) {
  QuadratureRule rule = quadrature_rule(h.dim(), h.degree_cap());
  NodeJets jets = node_jets(h, rule, JetLevel::gradient);
  std::vector<Vec3> even(rule.size());
  std::vector<double> hm(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    std::size_t j = antipode_index(rule, i);
    Vec3 gp = jets.gradients[i] + jets.values[i] * rule.nodes[i];
    Vec3 gm = jets.gradients[j] + jets.values[j] * rule.nodes[j];
    even[i] = 0.5 * (gp + gm);
    hm[i] = rule.nodes[i].dot(0.5 * (gp - gm));
  }
  return OddEvenParts{std::move(even), analyze(h.dim(), h.degree_cap(), hm, rule)};
}

double body_diameter(const SupportField& h) {
  QuadratureRule rule = quadrature_rule(h.dim(), h.degree_cap());
  NodeJets jets = node_jets(h, rule, JetLevel::value);
  double diam = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    diam = std::max(diam, jets.values[i] + jets.values[antipode_index(rule, i)]);
  return diam;
}

SupportField translate_support(const SupportField& h, const Vec3& c) {
  SupportField lin = SupportField::linear(h.dim(), h.degree_cap(), c);
  return h - lin;
}

}  // namespace copscan
