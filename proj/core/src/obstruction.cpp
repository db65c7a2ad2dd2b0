#include "copscan/obstruction.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace copscan {

namespace {

std::vector<int> interior_indices(const TransverseSupport& ts) {
  std::vector<int> idx;
  int K = static_cast<int>(ts.z_grid.size());
  for (int k = 2; k + 2 < K; ++k) idx.push_back(k);
  if (idx.empty()) throw std::invalid_argument("residual fields: grid too small");
  return idx;
}

SupportField radii_sum_field(const SupportField& h, int n) {
  return laplace_beltrami(h) + double(n - 2) * h;
}

// Per-height normalization sup|h| * sup|Delta h + (n-2)h|; strictly positive
// for ovaloid sections (the second factor is the curvature-radii sum).
double height_scale(const NodeJets& h_vals, const NodeJets& a_vals) {
  double sh = 0, sa = 0;
  for (double v : h_vals.values) sh = std::max(sh, std::abs(v));
  for (double v : a_vals.values) sa = std::max(sa, std::abs(v));
  return std::max(sh * sa, 1e-300);
}

}  // namespace

GridScalarField pde2_residual(const TransverseSupport& ts) {
  GridScalarField out;
  out.z_index = interior_indices(ts);
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int n = ts.n_ambient();
  out.values.resize(out.z_index.size());
  for (std::size_t t = 0; t < out.z_index.size(); ++t) {
    std::size_t k = std::size_t(out.z_index[t]);
    SupportField A = radii_sum_field(ts.fields[k], n);
    SupportField Adz = radii_sum_field(ts.dz_fields[k], n);
    NodeJets h = node_jets(ts.fields[k], rule, JetLevel::value);
    NodeJets hz = node_jets(ts.dz_fields[k], rule, JetLevel::value);
    NodeJets a = node_jets(A, rule, JetLevel::value);
    NodeJets adz = node_jets(Adz, rule, JetLevel::value);
    out.values[t].resize(rule.size());
    double scale = height_scale(h, a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      out.values[t][i] = h.values[i] * adz.values[i] - a.values[i] * hz.values[i];
      out.rel_sup = std::max(out.rel_sup, std::abs(out.values[t][i]) / scale);
    }
  }
  return out;
}

GridVectorField pde1_residual(const TransverseSupport& ts) {
  GridVectorField out;
  out.z_index = interior_indices(ts);
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int n = ts.n_ambient();
  out.values.resize(out.z_index.size());
  for (std::size_t t = 0; t < out.z_index.size(); ++t) {
    std::size_t k = std::size_t(out.z_index[t]);
    SupportField A = radii_sum_field(ts.fields[k], n);
    SupportField Adz = radii_sum_field(ts.dz_fields[k], n);
    NodeJets h = node_jets(ts.fields[k], rule, JetLevel::hessian);
    NodeJets hz = node_jets(ts.dz_fields[k], rule, JetLevel::gradient);
    NodeJets a = node_jets(A, rule, JetLevel::gradient);
    NodeJets adz = node_jets(Adz, rule, JetLevel::value);
    out.values[t].resize(rule.size());
    double scale = height_scale(h, a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      Vec3 v = hz.values[i] * a.gradients[i] + adz.values[i] * h.gradients[i] +
               2.0 * (h.values[i] * hz.gradients[i] + h.hessians[i] * hz.gradients[i]);
      out.values[t][i] = v;
      out.rel_sup = std::max(out.rel_sup, v.norm() / scale);
    }
  }
  return out;
}

ObstructionField assemble_obstruction(const GridVectorField& V, const GridScalarField& S,
                                      const TransverseSupport& ts, const Vec3& tau) {
  require_unit(tau);
  if (V.z_index != S.z_index)
    throw std::invalid_argument("assemble_obstruction: V and S on different grids");
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int n = ts.n_ambient();
  ObstructionField out;
  out.tau = tau;
  out.z_index = V.z_index;
  out.f_tau.resize(V.values.size());
  for (std::size_t t = 0; t < V.values.size(); ++t) {
    std::size_t k = std::size_t(V.z_index[t]);
    NodeJets h = node_jets(ts.fields[k], rule, JetLevel::value);
    NodeJets a = node_jets(radii_sum_field(ts.fields[k], n), rule, JetLevel::value);
    double scale = height_scale(h, a);
    out.f_tau[t].resize(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Vec3& u = rule.nodes[i];
      // V is tangent, so tau^T . V = tau . V
      out.f_tau[t][i] = tau.dot(V.values[t][i]) + tau.dot(u) * S.values[t][i];
      out.rel_sup = std::max(out.rel_sup, std::abs(out.f_tau[t][i]) / scale);
    }
  }
  return out;
}

ObstructionSweep sweep_obstruction(const GridVectorField& V, const GridScalarField& S,
                                   const TransverseSupport& ts,
                                   const std::vector<Vec3>& taus) {
  ObstructionSweep sweep;
  sweep.taus = taus;
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int n = ts.n_ambient();
  std::vector<double> scales(V.values.size());
  for (std::size_t t = 0; t < V.values.size(); ++t) {
    std::size_t k = std::size_t(V.z_index[t]);
    NodeJets h = node_jets(ts.fields[k], rule, JetLevel::value);
    NodeJets a = node_jets(radii_sum_field(ts.fields[k], n), rule, JetLevel::value);
    scales[t] = height_scale(h, a);
  }
  for (const Vec3& tau : taus) {
    double rel = 0;
    for (std::size_t t = 0; t < V.values.size(); ++t) {
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const Vec3& u = rule.nodes[i];
        double f = tau.dot(V.values[t][i]) + tau.dot(u) * S.values[t][i];
        double r = std::abs(f) / scales[t];
        rel = std::max(rel, r);
        if (r > sweep.witness.magnitude) {
          sweep.witness.magnitude = r;
          sweep.witness.tau = tau;
          sweep.witness.u = u;
          sweep.witness.z = ts.z_grid[std::size_t(V.z_index[t])];
        }
      }
    }
    sweep.rel_sups.push_back(rel);
    sweep.max_rel = std::max(sweep.max_rel, rel);
  }
  return sweep;
}

std::vector<Vec3> tau_directions(const SphereDim& dim, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("tau_directions: count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
  double phase = unif(rng);
  std::vector<Vec3> taus;
  taus.reserve(count);
  if (dim.d == 1) {
    for (int j = 0; j < count; ++j) {
      double th = phase + 2.0 * M_PI * j / count;
      taus.emplace_back(std::cos(th), std::sin(th), 0.0);
    }
    return taus;
  }
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < count; ++j) {
    double z = count == 1 ? 0.0 : 1.0 - 2.0 * (j + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = phase + golden * j;
    taus.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return taus;
}

QSquaredReport q_squared(const TransverseSupport& ts) {
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int n = ts.n_ambient();
  std::size_t K = ts.z_grid.size();
  std::vector<double> lo(rule.size(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(rule.size(), -std::numeric_limits<double>::infinity());
  double sup_ratio = 0;
  int anchor = ts.index_nearest(0.0);
  std::vector<double> anchor_ratio(rule.size());
  for (std::size_t k = 0; k < K; ++k) {
    NodeJets h = node_jets(ts.fields[k], rule, JetLevel::value);
    NodeJets a = node_jets(radii_sum_field(ts.fields[k], n), rule, JetLevel::value);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      if (h.values[i] <= 0)
        throw std::invalid_argument("q_squared: section support must be positive");
      double ratio = a.values[i] / h.values[i];
      lo[i] = std::min(lo[i], ratio);
      hi[i] = std::max(hi[i], ratio);
      sup_ratio = std::max(sup_ratio, std::abs(ratio));
      if (k == std::size_t(anchor)) anchor_ratio[i] = ratio;
    }
  }
  QSquaredReport rep{analyze(ts.dim, ts.degree_cap, anchor_ratio, rule), 0.0};
  for (std::size_t i = 0; i < rule.size(); ++i)
    rep.z_variation = std::max(rep.z_variation, (hi[i] - lo[i]) / std::max(sup_ratio, 1e-300));
  return rep;
}

EllipsoidTestReport ellipsoid_criterion(const SupportField& h0, double tol) {
  const SphereDim& dim = h0.dim();
  int L2 = 2 * h0.degree_cap();
  QuadratureRule rule = quadrature_rule(dim, L2);
  NodeJets hv = node_jets(h0, rule, JetLevel::value);
  std::vector<double> sq(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) sq[i] = hv.values[i] * hv.values[i];
  // h0^2 is band-limited at 2L, so this projection is exact.
  SupportField h2 = analyze(dim, L2, sq, rule);
  int n = dim.tube_ambient();
  SupportField F = laplace_beltrami(h2) + 2.0 * double(n - 1) * h2;

  EllipsoidTestReport rep;
  rep.constant_value = dim.d == 1 ? F.coeffs()(0) : F.coeffs()(0) / std::sqrt(4.0 * M_PI);
  NodeJets fj = node_jets(F, rule, JetLevel::gradient);
  for (std::size_t i = 0; i < rule.size(); ++i)
    rep.gradient_sup = std::max(rep.gradient_sup, fj.gradients[i].norm());
  rep.gradient_rel = rep.gradient_sup / std::max(std::abs(rep.constant_value), 1e-300);

  // Weighted least squares of h^2 against the quadratic-form monomials.
  int m = dim.section_ambient();
  int nb = m == 2 ? 3 : 6;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
  auto monomials = [&](const Vec3& u, Eigen::VectorXd& phi) {
    if (m == 2) {
      phi << u.x() * u.x(), u.y() * u.y(), u.x() * u.y();
    } else {
      phi << u.x() * u.x(), u.y() * u.y(), u.z() * u.z(), u.x() * u.y(), u.x() * u.z(),
          u.y() * u.z();
    }
  };
  Eigen::VectorXd phi(nb);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    monomials(rule.nodes[i], phi);
    G += rule.weights[i] * phi * phi.transpose();
    rhs += rule.weights[i] * sq[i] * phi;
  }
  Eigen::VectorXd beta = G.ldlt().solve(rhs);
  rep.B = Eigen::MatrixXd::Zero(m, m);
  if (m == 2) {
    rep.B << beta(0), beta(2) / 2, beta(2) / 2, beta(1);
  } else {
    rep.B << beta(0), beta(3) / 2, beta(4) / 2, beta(3) / 2, beta(1), beta(5) / 2, beta(4) / 2,
        beta(5) / 2, beta(2);
  }
  double sup_sq = 0, sup_err = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    monomials(rule.nodes[i], phi);
    sup_sq = std::max(sup_sq, std::abs(sq[i]));
    sup_err = std::max(sup_err, std::abs(sq[i] - phi.dot(beta)));
  }
  rep.fit_residual = sup_err / std::max(sup_sq, 1e-300);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.B);
  bool positive = es.eigenvalues().minCoeff() > 0;
  if (positive) {
    rep.semi_axes = es.eigenvalues().cwiseSqrt();
    rep.principal_axes = es.eigenvectors();
  }
  bool flat = rep.gradient_rel < tol && rep.fit_residual < tol;
  if (flat && !positive)
    throw inconsistency_error(
        "ellipsoid_criterion: quadratic fit is indefinite despite a flat criterion field");
  rep.accepted = flat && positive;
  return rep;
}

AffineTestReport affine_test(const std::vector<Vec3>& centers,
                             const std::vector<double>& z_grid, double tol,
                             double diameter_scale) {
  if (centers.size() != z_grid.size() || centers.size() < 3)
    throw std::invalid_argument("affine_test: needs >= 3 matched heights");
  double dz = z_grid[1] - z_grid[0];
  for (std::size_t k = 1; k < z_grid.size(); ++k)
    if (std::abs((z_grid[k] - z_grid[k - 1]) - dz) > 1e-9 * std::max(1.0, std::abs(dz)))
      throw std::invalid_argument("affine_test: needs a uniform grid");
  AffineTestReport rep;
  for (std::size_t k = 1; k + 1 < centers.size(); ++k) {
    Vec3 second = centers[k + 1] - 2.0 * centers[k] + centers[k - 1];
    double mag = second.norm() / (dz * dz);
    if (mag > rep.max_second_difference) {
      rep.max_second_difference = mag;
      rep.argmax_index = static_cast<int>(k);
      rep.argmax_direction = second.norm() > 0 ? Vec3(second.normalized()) : Vec3::UnitX();
    }
  }
  rep.rel = rep.max_second_difference / std::max(diameter_scale, 1e-300);
  rep.is_affine = rep.rel < tol;
  // least-squares line through (z_k, c_k)
  double n = double(z_grid.size());
  double sz = 0, szz = 0;
  Vec3 sc = Vec3::Zero(), szc = Vec3::Zero();
  for (std::size_t k = 0; k < z_grid.size(); ++k) {
    sz += z_grid[k];
    szz += z_grid[k] * z_grid[k];
    sc += centers[k];
    szc += z_grid[k] * centers[k];
  }
  double det = n * szz - sz * sz;
  rep.line_dir = (n * szc - sz * sc) / det;
  rep.line_base = (sc - rep.line_dir * sz) / n;
  return rep;
}

}  // namespace copscan
