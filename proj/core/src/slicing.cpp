#include "copscan/slicing.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace copscan {

namespace {

// Continuous-in-z access to the section data. Prefers the generator carried
// by the TransverseSupport; falls back to cubic Lagrange interpolation of the
// stored coefficient vectors.
class SectionCurve {
 public:
  explicit SectionCurve(const TransverseSupport& ts) : ts_(ts) {
    analytic_ = ts.source && ts.source->section && ts.source->section_dz;
  }

  SupportField field(double z) const {
    if (analytic_) return ts_.source->section(z);
    return interpolate(ts_.fields, z, false);
  }
  SupportField field_dz(double z) const {
    if (analytic_) return ts_.source->section_dz(z);
    return interpolate(ts_.fields, z, true);
  }
  Vec3 center(double z) const {
    if (analytic_) return ts_.source->center(z);
    return interp_center(z, false);
  }
  Vec3 center_dz(double z) const {
    if (analytic_) return ts_.source->center_dz(z);
    return interp_center(z, true);
  }

  // Gamma including the center, plus everything the tilted-plane solvers
  // need at one (u, z).
  struct GammaJet {
    double h = 0;
    Vec3 gamma = Vec3::Zero();     // c + grad h + h u
    Vec3 gamma_dz = Vec3::Zero();  // c' + grad h_z + h_z u
    Mat3 dgamma_du = Mat3::Zero(); // reverse Weingarten: Hess h + h id (tangent map)
  };
  GammaJet jet(const Vec3& u, double z, bool need_du) const {
    GammaJet out;
    SupportField f = field(z);
    if (need_du) {
      FieldJet j = field_jet(f, u);
      out.h = j.value;
      out.gamma = center(z) + j.gradient + j.value * u;
      Mat3 P = Mat3::Identity() - u * u.transpose();
      out.dgamma_du = j.hessian + j.value * P;
    } else {
      FieldJet j = value_and_gradient(f, u);
      out.h = j.value;
      out.gamma = center(z) + j.gradient + j.value * u;
    }
    SupportField g = field_dz(z);
    FieldJet jz = value_and_gradient(g, u);
    out.gamma_dz = center_dz(z) + jz.gradient + jz.value * u;
    return out;
  }

  Vec3 gamma(const Vec3& u, double z) const {
    SupportField f = field(z);
    FieldJet j = value_and_gradient(f, u);
    return center(z) + j.gradient + j.value * u;
  }

 private:
  static FieldJet value_and_gradient(const SupportField& f, const Vec3& u) {
    FieldJet j;
    j.value = synthesize(f, u);
    j.gradient = surface_gradient(f, u);
    return j;
  }

  SupportField interpolate(const std::vector<SupportField>& fields, double z,
                           bool derivative) const {
    const auto& grid = ts_.z_grid;
    int K = static_cast<int>(grid.size());
    if (K < 4) throw std::invalid_argument("SectionCurve: needs >= 4 heights to interpolate");
    int k = ts_.index_nearest(z);
    int lo = std::clamp(k - 1, 0, K - 4);
    SupportField acc(ts_.dim, ts_.degree_cap);
    for (int a = 0; a < 4; ++a) {
      double w = derivative ? lagrange_weight_d1(grid, lo, a, z) : lagrange_weight(grid, lo, a, z);
      acc += w * fields[std::size_t(lo + a)];
    }
    return acc;
  }
  Vec3 interp_center(double z, bool derivative) const {
    const auto& grid = ts_.z_grid;
    int K = static_cast<int>(grid.size());
    if (K < 4) throw std::invalid_argument("SectionCurve: needs >= 4 heights to interpolate");
    int k = ts_.index_nearest(z);
    int lo = std::clamp(k - 1, 0, K - 4);
    Vec3 acc = Vec3::Zero();
    for (int a = 0; a < 4; ++a) {
      double w = derivative ? lagrange_weight_d1(grid, lo, a, z) : lagrange_weight(grid, lo, a, z);
      acc += w * ts_.centers[std::size_t(lo + a)];
    }
    return acc;
  }
  static double lagrange_weight(const std::vector<double>& g, int lo, int a, double z) {
    double w = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) w *= (z - g[lo + b]) / (g[lo + a] - g[lo + b]);
    return w;
  }
  static double lagrange_weight_d1(const std::vector<double>& g, int lo, int a, double z) {
    double acc = 0;
    for (int c = 0; c < 4; ++c) {
      if (c == a) continue;
      double w = 1.0 / (g[lo + a] - g[lo + c]);
      for (int b = 0; b < 4; ++b)
        if (b != a && b != c) w *= (z - g[lo + b]) / (g[lo + a] - g[lo + b]);
      acc += w;
    }
    return acc;
  }

  const TransverseSupport& ts_;
  bool analytic_ = false;
};

void check_contraction(const TransverseSupport& ts, const TiltedPlane& plane) {
  require_unit(plane.tau);
  double guard = std::abs(plane.eps) * ts.gamma_dz_bound;
  if (guard >= 0.5)
    throw tilt_error("tilt too large: |eps| * sup|dGamma/dz| = " + std::to_string(guard) +
                     " >= 0.5");
}

double solve_height_impl(const SectionCurve& curve, const TransverseSupport& ts,
                         const TiltedPlane& plane, const Vec3& u) {
  double z = plane.z0;
  for (int it = 0; it < 200; ++it) {
    double next = plane.z0 + plane.eps * plane.tau.dot(curve.gamma(u, z));
    if (next < ts.z_grid.front() || next > ts.z_grid.back())
      throw tilt_error("height iterate left the grid range at z = " + std::to_string(next));
    if (std::abs(next - z) < 1e-15 * (1.0 + std::abs(next))) return next;
    z = next;
  }
  return z;
}

}  // namespace

double solve_height(const TransverseSupport& ts, const TiltedPlane& plane, const Vec3& u) {
  require_unit(u);
  check_contraction(ts, plane);
  SectionCurve curve(ts);
  return solve_height_impl(curve, ts, plane, u);
}

double height_eps_slope(const TransverseSupport& ts, const Vec3& tau, double z0, const Vec3& u) {
  SectionCurve curve(ts);
  return tau.dot(curve.gamma(u, z0));
}

SectionReport cross_section(const TransverseSupport& ts, const TiltedPlane& plane) {
  check_contraction(ts, plane);
  SectionCurve curve(ts);
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  std::size_t N = rule.size();

  SectionReport rep;
  rep.plane = plane;
  rep.theta_eps.resize(N);
  rep.points.resize(N);
  rep.heights.resize(N);
  std::vector<double> support_raw(N);

  // p(u) = Gamma(u, z(eps, u)); the support point of the projected section in
  // direction w is the maximizer of w . p(u).
  auto point_at = [&](const Vec3& u, double& z_out) {
    TiltedPlane pl = plane;
    double z = solve_height_impl(curve, ts, pl, u);
    z_out = z;
    return curve.gamma(u, z);
  };
  // Tangent differential of p at (u, z(u)).
  auto dp_along = [&](const SectionCurve::GammaJet& jet, const Vec3& X) {
    double denom = 1.0 - plane.eps * plane.tau.dot(jet.gamma_dz);
    Vec3 d1 = jet.dgamma_du * X;
    double dz = plane.eps * plane.tau.dot(d1) / denom;
    return Vec3(d1 + jet.gamma_dz * dz);
  };

  // Outward normal of the projected section at p(u).
  auto normal_at = [&](const Vec3& u, double& z_out, Vec3* p_out) {
    double z;
    Vec3 p = point_at(u, z);
    z_out = z;
    if (p_out) *p_out = p;
    auto jet = curve.jet(u, z, true);
    Vec3 n;
    if (ts.dim.d == 1) {
      Vec3 t(-u.y(), u.x(), 0.0);
      Vec3 dp = dp_along(jet, t);
      n = Vec3(dp.y(), -dp.x(), 0.0);
    } else {
      Vec3 e1, e2;
      tangent_basis(ts.dim, u, e1, e2);
      n = dp_along(jet, e1).cross(dp_along(jet, e2));
    }
    double nn = n.norm();
    if (nn < 1e-14)
      throw section_not_ovaloid_error("projected section has a degenerate tangent map");
    return Vec3(n / nn);
  };

  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(N, [&](std::size_t i) {
    try {
      const Vec3& w = rule.nodes[i];
      Vec3 u = w;  // theta_0 = id
      if (ts.dim.d == 1) {
        // Convexity makes the normal angle monotone in theta; bracket the
        // crossing near w and bisect.
        auto cross_w = [&](double th) {
          Vec3 uu(std::cos(th), std::sin(th), 0.0);
          double zz;
          Vec3 n = normal_at(uu, zz, nullptr);
          if (n.dot(w) <= 0) return std::numeric_limits<double>::quiet_NaN();
          return n.x() * w.y() - n.y() * w.x();  // sin(angle from n to w)
        };
        double th0 = std::atan2(w.y(), w.x());
        double lo = th0, hi = th0;
        double flo = cross_w(th0);
        bool bracketed = false;
        for (int k = 1; k <= 64 && !bracketed; ++k) {
          double step = 0.05 * k * k;
          if (std::isnan(flo)) throw section_not_ovaloid_error("normal flipped away from w");
          if (flo > 0) {
            hi = th0 + step;
            double fhi = cross_w(hi);
            if (std::isnan(fhi)) throw section_not_ovaloid_error("normal inversion lost bracket");
            if (fhi <= 0) bracketed = true;
            else lo = hi;
          } else {
            lo = th0 - step;
            double f2 = cross_w(lo);
            if (std::isnan(f2)) throw section_not_ovaloid_error("normal inversion lost bracket");
            if (f2 > 0) { hi = th0 - 0.05 * (k - 1) * (k - 1); bracketed = true; }
            else hi = lo;
          }
        }
        if (!bracketed) throw section_not_ovaloid_error("normal inversion failed to bracket");
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (lo + hi);
          double fm = cross_w(mid);
          if (std::isnan(fm)) throw section_not_ovaloid_error("normal inversion lost bracket");
          if (fm > 0)
            lo = mid;
          else
            hi = mid;
        }
        double th = 0.5 * (lo + hi);
        u = Vec3(std::cos(th), std::sin(th), 0.0);
      } else {
        // damped Broyden iteration on n(u) = w in the tangent chart at w;
        // theta_eps stays near the identity for admissible tilts
        Vec3 e1, e2;
        tangent_basis(ts.dim, w, e1, e2);
        Eigen::Vector2d s = Eigen::Vector2d::Zero();
        Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
        auto residual = [&](const Eigen::Vector2d& sv, Vec3& u_out) {
          u_out = (w + sv(0) * e1 + sv(1) * e2).normalized();
          double zz;
          Vec3 n = normal_at(u_out, zz, nullptr);
          return Eigen::Vector2d(e1.dot(n - w), e2.dot(n - w));
        };
        Vec3 ucur;
        Eigen::Vector2d R = residual(s, ucur);
        bool converged = R.norm() < 1e-13;
        for (int it = 0; it < 60 && !converged; ++it) {
          Eigen::Vector2d step = -J.fullPivLu().solve(R);
          if (!step.allFinite()) step = -R;
          double damp = 1.0;
          Eigen::Vector2d s_new, R_new;
          Vec3 u_new;
          for (int ls = 0; ls < 20; ++ls) {
            s_new = s + damp * step;
            R_new = residual(s_new, u_new);
            if (R_new.norm() < R.norm() || R_new.norm() < 1e-13) break;
            damp *= 0.5;
          }
          Eigen::Vector2d ds = s_new - s;
          if (ds.squaredNorm() > 0)
            J += (R_new - R - J * ds) * ds.transpose() / ds.squaredNorm();
          s = s_new;
          R = R_new;
          ucur = u_new;
          converged = R.norm() < 1e-13;
        }
        if (!converged && R.norm() > 1e-9)
          throw section_not_ovaloid_error("normal inversion did not converge at a node");
        u = ucur;
      }
      double zstar;
      Vec3 p = point_at(u, zstar);
      rep.theta_eps[i] = u;
      rep.points[i] = p;
      rep.heights[i] = zstar;
      support_raw[i] = rule.nodes[i].dot(p);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  SupportField raw = analyze(ts.dim, ts.degree_cap, support_raw, rule);
  CentrixReport rep_c = centrix(raw, rule);
  rep.centrix_values = rep_c.values;
  rep.center = rep_c.mean_center;
  rep.sup_deviation = rep_c.sup_deviation;
  rep.h_eps = translate_support(raw, rep_c.mean_center);
  rep.diameter = body_diameter(rep.h_eps);
  return rep;
}

std::vector<Vec3> centrix_eps_derivative(const TransverseSupport& ts, const Vec3& tau,
                                         double z0, double eps_step, bool richardson) {
  auto diff = [&](double e) {
    SectionReport plus = cross_section(ts, TiltedPlane{tau, z0, e});
    SectionReport minus = cross_section(ts, TiltedPlane{tau, z0, -e});
    std::vector<Vec3> out(plus.centrix_values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (plus.centrix_values[i] - minus.centrix_values[i]) / (2.0 * e);
    return out;
  };
  std::vector<Vec3> d1 = diff(eps_step);
  if (!richardson) return d1;
  std::vector<Vec3> d2 = diff(eps_step / 2.0);
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] = (4.0 * d2[i] - d1[i]) / 3.0;
  return d1;
}

std::vector<Vec3> centrix_derivative_closed_form(const TransverseSupport& ts, const Vec3& tau,
                                                 double z0) {
  require_unit(tau);
  int k = ts.index_nearest(z0);
  if (std::abs(ts.z_grid[std::size_t(k)] - z0) > 1e-9)
    throw std::invalid_argument("centrix_derivative_closed_form: z0 must be a grid height");
  if (!ts.analytic_dz &&
      (k < 2 || k + 2 >= static_cast<int>(ts.z_grid.size())))
    throw std::invalid_argument(
        "centrix_derivative_closed_form: z0 must be interior for differenced d/dz data");
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  const SupportField& h = ts.fields[std::size_t(k)];
  const SupportField& hz = ts.dz_fields[std::size_t(k)];
  NodeJets jets_h = node_jets(h, rule, JetLevel::hessian);
  NodeJets jets_z = node_jets(hz, rule, JetLevel::gradient);
  Vec3 c = ts.centers[std::size_t(k)];
  Vec3 cdz;
  if (ts.source && ts.source->center_dz) {
    cdz = ts.source->center_dz(z0);
  } else {
    if (k == 0 || k + 1 == static_cast<int>(ts.z_grid.size()))
      throw std::invalid_argument("centrix_derivative_closed_form: z0 must be interior");
    cdz = (ts.centers[std::size_t(k + 1)] - ts.centers[std::size_t(k - 1)]) /
          (ts.z_grid[std::size_t(k + 1)] - ts.z_grid[std::size_t(k - 1)]);
  }
  std::vector<Vec3> out(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Vec3& u = rule.nodes[i];
    Vec3 tauT = tangent_project(u, tau);
    Vec3 grad_h = jets_h.gradients[i];
    double hval = jets_h.values[i];
    Vec3 gminus = grad_h + hval * u;                       // Gamma^-(u, z0)
    Vec3 gz = jets_z.gradients[i] + jets_z.values[i] * u;  // dGamma^-/dz
    Mat3 P = Mat3::Identity() - u * u.transpose();
    Vec3 rev_weingarten = jets_h.hessians[i] * tauT + hval * (P * tauT);
    out[i] = jets_z.values[i] * rev_weingarten + tau.dot(c) * cdz + tau.dot(gminus) * gz;
  }
  return out;
}

std::vector<double> spherical_divergence(const SphereDim& dim, int degree_cap,
                                         const QuadratureRule& rule,
                                         const std::vector<Vec3>& field) {
  if (field.size() != rule.size())
    throw std::invalid_argument("spherical_divergence: field size mismatch");
  std::vector<double> out(rule.size(), 0.0);
  int ncomp = dim.section_ambient();
  for (int a = 0; a < ncomp; ++a) {
    std::vector<double> comp(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) comp[i] = field[i](a);
    SupportField fa = analyze(dim, degree_cap, comp, rule);
    NodeJets jets = node_jets(fa, rule, JetLevel::gradient);
    for (std::size_t i = 0; i < rule.size(); ++i) out[i] += jets.gradients[i](a);
  }
  return out;
}

}  // namespace copscan
