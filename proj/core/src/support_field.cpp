#include "copscan/support_field.hpp"

#include <cmath>

namespace copscan {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = xi;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = xi;
    for (int l = 2; l <= n; ++l) {
      double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[n - 1 - i] = xi;  // ascending order
    w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

// Triangular tables of Qbar_l^m(z) = Nbar_lm P_l^m(z) / (1-z^2)^{m/2} and its
// first two z-derivatives; polynomials in z, stable three-term recurrences.
struct QbarTables {
  int L;
  std::vector<double> q, qp, qpp;
  int idx(int l, int m) const { return l * (l + 1) / 2 + m; }

  QbarTables(int L_, double z, bool need_d1, bool need_d2) : L(L_) {
    // Qbar_m^m ~ (1-z^2)^{-m/2} at the high orders; keep the scaled
    // recurrence inside double range.
    double s2 = std::max(1.0 - z * z, 1e-30);
    if (-0.5 * L * std::log(s2) > 690.0)
      throw std::invalid_argument(
          "degree cap too large for the scaled Legendre recurrence at this latitude");
    int sz = (L + 1) * (L + 2) / 2;
    q.assign(sz, 0.0);
    if (need_d1) qp.assign(sz, 0.0);
    if (need_d2) qpp.assign(sz, 0.0);
    q[idx(0, 0)] = std::sqrt(1.0 / (4.0 * M_PI));
    for (int m = 1; m <= L; ++m)
      q[idx(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * q[idx(m - 1, m - 1)];
    for (int m = 0; m < L; ++m) {
      double c = std::sqrt(2.0 * m + 3.0);
      q[idx(m + 1, m)] = c * z * q[idx(m, m)];
      if (need_d1) qp[idx(m + 1, m)] = c * q[idx(m, m)];
    }
    for (int m = 0; m <= L; ++m) {
      for (int l = m + 2; l <= L; ++l) {
        double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                             (4.0 * double(l - 1) * (l - 1) - 1.0));
        q[idx(l, m)] = a * (z * q[idx(l - 1, m)] - b * q[idx(l - 2, m)]);
        if (need_d1)
          qp[idx(l, m)] =
              a * (q[idx(l - 1, m)] + z * qp[idx(l - 1, m)] - b * qp[idx(l - 2, m)]);
        if (need_d2)
          qpp[idx(l, m)] =
              a * (2.0 * qp[idx(l - 1, m)] + z * qpp[idx(l - 1, m)] - b * qpp[idx(l - 2, m)]);
      }
    }
  }
};

// Real/imag parts of (x+iy)^m for m = 0..L.
void complex_powers(double x, double y, int L, std::vector<double>& re, std::vector<double>& im) {
  re.assign(L + 1, 0.0);
  im.assign(L + 1, 0.0);
  re[0] = 1.0;
  for (int m = 1; m <= L; ++m) {
    re[m] = re[m - 1] * x - im[m - 1] * y;
    im[m] = re[m - 1] * y + im[m - 1] * x;
  }
}

constexpr double kSqrt2 = 1.4142135623730951;

// Walks every basis element at u, reporting the value and (optionally) the
// ambient gradient and Hessian of the polynomial extension used here:
//   d=1: C_m(x,y) = Re/Im (x+iy)^m
//   d=2: sqrt(2)^{m!=0} Qbar_l^m(z) * Re/Im (x+iy)^m.
// Any smooth extension yields the same surface gradient after tangential
// projection, and the covariant Hessian via
//   Hess f (X) = P Hbar X - (u . grad_ext) X   for tangent X.
template <typename Fn>
void walk_basis(const SphereDim& dim, int L, const Vec3& u, bool need_grad, bool need_hess,
                Fn&& fn) {
  std::vector<double> re, im;
  complex_powers(u.x(), u.y(), L, re, im);
  if (dim.d == 1) {
    Vec3 g = Vec3::Zero();
    Mat3 H = Mat3::Zero();
    fn(0, 1.0, g, H);  // constant basis element
    for (int m = 1; m <= L; ++m) {
      double mm1 = double(m) * (m - 1);
      // cos branch
      if (need_grad) g = Vec3(m * re[m - 1], -m * im[m - 1], 0.0);
      if (need_hess) {
        double rr = m >= 2 ? re[m - 2] : 0.0, ii = m >= 2 ? im[m - 2] : 0.0;
        H(0, 0) = mm1 * rr;
        H(0, 1) = H(1, 0) = -mm1 * ii;
        H(1, 1) = -mm1 * rr;
      }
      fn(SupportField::index_d1(m, false), re[m], g, H);
      // sin branch
      if (need_grad) g = Vec3(m * im[m - 1], m * re[m - 1], 0.0);
      if (need_hess) {
        double rr = m >= 2 ? re[m - 2] : 0.0, ii = m >= 2 ? im[m - 2] : 0.0;
        H(0, 0) = mm1 * ii;
        H(0, 1) = H(1, 0) = mm1 * rr;
        H(1, 1) = -mm1 * ii;
      }
      fn(SupportField::index_d1(m, true), im[m], g, H);
    }
    return;
  }
  QbarTables T(L, u.z(), need_grad || need_hess, need_hess);
  Vec3 g = Vec3::Zero();
  Mat3 H = Mat3::Zero();
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      int am = std::abs(m);
      double fac = (m == 0) ? 1.0 : kSqrt2;
      double Q = T.q[T.idx(l, am)];
      double C, Cx, Cy;  // angular factor and its x/y derivatives
      double Cxx = 0, Cxy = 0, Cyy = 0;
      if (m >= 0) {
        C = re[am];
        Cx = am >= 1 ? am * re[am - 1] : 0.0;
        Cy = am >= 1 ? -double(am) * im[am - 1] : 0.0;
        if (am >= 2) {
          double s = double(am) * (am - 1);
          Cxx = s * re[am - 2];
          Cxy = -s * im[am - 2];
          Cyy = -s * re[am - 2];
        }
      } else {
        C = im[am];
        Cx = am * im[am - 1];
        Cy = am * re[am - 1];
        if (am >= 2) {
          double s = double(am) * (am - 1);
          Cxx = s * im[am - 2];
          Cxy = s * re[am - 2];
          Cyy = -s * im[am - 2];
        }
      }
      double val = fac * Q * C;
      if (need_grad || need_hess) {
        double Qp = T.qp[T.idx(l, am)];
        g = fac * Vec3(Q * Cx, Q * Cy, Qp * C);
        if (need_hess) {
          double Qpp = T.qpp[T.idx(l, am)];
          H(0, 0) = fac * Q * Cxx;
          H(0, 1) = H(1, 0) = fac * Q * Cxy;
          H(1, 1) = fac * Q * Cyy;
          H(0, 2) = H(2, 0) = fac * Qp * Cx;
          H(1, 2) = H(2, 1) = fac * Qp * Cy;
          H(2, 2) = fac * Qpp * C;
        }
      }
      fn(SupportField::index_d2(l, m), val, g, H);
    }
  }
}

}  // namespace

QuadratureRule quadrature_rule(const SphereDim& dim, int degree_cap) {
  if (degree_cap < 0) throw std::invalid_argument("quadrature_rule: negative degree cap");
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree_cap = degree_cap;
  if (dim.d == 1) {
    int n = 2 * degree_cap + 2;
    rule.nodes.reserve(n);
    rule.weights.assign(n, 2.0 * M_PI / n);
    for (int j = 0; j < n; ++j) {
      double th = 2.0 * M_PI * j / n;
      rule.nodes.emplace_back(std::cos(th), std::sin(th), 0.0);
    }
    return rule;
  }
  int nz = degree_cap + 1;
  int nphi = 2 * degree_cap + 2;
  std::vector<double> z, wz;
  gauss_legendre(nz, z, wz);
  rule.nodes.reserve(std::size_t(nz) * nphi);
  rule.weights.reserve(std::size_t(nz) * nphi);
  for (int iz = 0; iz < nz; ++iz) {
    double s = std::sqrt(std::max(0.0, 1.0 - z[iz] * z[iz]));
    for (int ip = 0; ip < nphi; ++ip) {
      double phi = 2.0 * M_PI * ip / nphi;
      rule.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), z[iz]);
      rule.weights.push_back(wz[iz] * 2.0 * M_PI / nphi);
    }
  }
  return rule;
}

SupportField SupportField::constant(SphereDim dim, int L, double value) {
  SupportField f(dim, L);
  f.coeffs()(0) = dim.d == 1 ? value : value * std::sqrt(4.0 * M_PI);
  return f;
}

SupportField SupportField::linear(SphereDim dim, int L, const Vec3& v) {
  SupportField f(dim, L);
  if (dim.d == 1) {
    if (L < 1) throw std::invalid_argument("linear field needs L >= 1");
    f.coeffs()(index_d1(1, false)) = v.x();
    f.coeffs()(index_d1(1, true)) = v.y();
  } else {
    if (L < 1) throw std::invalid_argument("linear field needs L >= 1");
    double c = std::sqrt(4.0 * M_PI / 3.0);
    f.coeffs()(index_d2(1, 1)) = c * v.x();
    f.coeffs()(index_d2(1, -1)) = c * v.y();
    f.coeffs()(index_d2(1, 0)) = c * v.z();
  }
  return f;
}

int SupportField::degree_of_index(int k) const {
  if (dim_.d == 1) return k == 0 ? 0 : (k + 1) / 2;
  return static_cast<int>(std::floor(std::sqrt(double(k)) + 1e-9));
}

SupportField& SupportField::operator+=(const SupportField& o) {
  if (o.dim_.d != dim_.d || o.degree_cap_ != degree_cap_)
    throw std::invalid_argument("SupportField: shape mismatch");
  coeffs_ += o.coeffs_;
  return *this;
}
SupportField& SupportField::operator-=(const SupportField& o) {
  if (o.dim_.d != dim_.d || o.degree_cap_ != degree_cap_)
    throw std::invalid_argument("SupportField: shape mismatch");
  coeffs_ -= o.coeffs_;
  return *this;
}
SupportField& SupportField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

double synthesize(const SupportField& f, const Vec3& u) {
  require_unit(u);
  double acc = 0.0;
  const auto& c = f.coeffs();
  walk_basis(f.dim(), f.degree_cap(), u, false, false,
             [&](int k, double v, const Vec3&, const Mat3&) { acc += c(k) * v; });
  return acc;
}

std::vector<double> synthesize(const SupportField& f, const std::vector<Vec3>& us) {
  std::vector<double> out(us.size());
  parallel_for(us.size(), [&](std::size_t i) { out[i] = synthesize(f, us[i]); });
  return out;
}

SupportField analyze(const SphereDim& dim, int degree_cap, const std::vector<double>& samples,
                     const QuadratureRule& rule) {
  if (samples.size() != rule.size())
    throw std::invalid_argument("analyze: sample count does not match quadrature rule");
  int nc = SupportField::coeff_count(dim, degree_cap);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(nc);
  if (dim.d == 1) {
    int n = static_cast<int>(rule.size());
    for (int j = 0; j < n; ++j) {
      double wf = rule.weights[j] * samples[j];
      std::vector<double> re, im;
      complex_powers(rule.nodes[j].x(), rule.nodes[j].y(), degree_cap, re, im);
      acc(0) += wf;
      for (int m = 1; m <= degree_cap; ++m) {
        acc(SupportField::index_d1(m, false)) += wf * re[m];
        acc(SupportField::index_d1(m, true)) += wf * im[m];
      }
    }
    acc(0) /= 2.0 * M_PI;
    acc.tail(nc - 1) /= M_PI;
    return SupportField(dim, degree_cap, std::move(acc));
  }
  // Separable: per-ring angular sums against (x+iy)^m, then Legendre dots.
  int L = degree_cap;
  int nphi = 2 * rule.degree_cap + 2;
  int nz = rule.degree_cap + 1;
  std::vector<double> re, im;
  for (int iz = 0; iz < nz; ++iz) {
    double z = rule.nodes[std::size_t(iz) * nphi].z();
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(L + 1), cb = Eigen::VectorXd::Zero(L + 1);
    for (int ip = 0; ip < nphi; ++ip) {
      std::size_t i = std::size_t(iz) * nphi + ip;
      double wf = rule.weights[i] * samples[i];
      complex_powers(rule.nodes[i].x(), rule.nodes[i].y(), L, re, im);
      for (int m = 0; m <= L; ++m) {
        ca(m) += wf * re[m];
        cb(m) += wf * im[m];
      }
    }
    QbarTables T(L, z, false, false);
    for (int m = 0; m <= L; ++m) {
      double fac = (m == 0) ? 1.0 : kSqrt2;
      for (int l = m; l <= L; ++l) {
        double q = fac * T.q[T.idx(l, m)];
        acc(SupportField::index_d2(l, m)) += q * ca(m);
        if (m > 0) acc(SupportField::index_d2(l, -m)) += q * cb(m);
      }
    }
  }
  return SupportField(dim, degree_cap, std::move(acc));
}

SupportField analyze(const SphereDim& dim, int degree_cap, const std::vector<double>& samples) {
  return analyze(dim, degree_cap, samples, quadrature_rule(dim, degree_cap));
}

SupportField laplace_beltrami(const SupportField& f) {
  SupportField out = f;
  for (int k = 0; k < out.coeffs().size(); ++k) {
    int deg = f.degree_of_index(k);
    double eig = f.dim().d == 1 ? -double(deg) * deg : -double(deg) * (deg + 1);
    out.coeffs()(k) *= eig;
  }
  return out;
}

Vec3 surface_gradient(const SupportField& f, const Vec3& u) {
  require_unit(u);
  Vec3 acc = Vec3::Zero();
  const auto& c = f.coeffs();
  walk_basis(f.dim(), f.degree_cap(), u, true, false,
             [&](int k, double, const Vec3& g, const Mat3&) { acc += c(k) * g; });
  Vec3 out = tangent_project(u, acc);
  if (f.dim().d == 1) out.z() = 0.0;
  return out;
}

FieldJet field_jet(const SupportField& f, const Vec3& u) {
  require_unit(u);
  FieldJet jet;
  Vec3 g = Vec3::Zero();
  Mat3 H = Mat3::Zero();
  const auto& c = f.coeffs();
  walk_basis(f.dim(), f.degree_cap(), u, true, true,
             [&](int k, double v, const Vec3& gk, const Mat3& Hk) {
               jet.value += c(k) * v;
               g += c(k) * gk;
               H += c(k) * Hk;
             });
  Mat3 P = Mat3::Identity() - u * u.transpose();
  double nu = u.dot(g);
  jet.gradient = P * g;
  jet.hessian = P * H * P - nu * P;
  if (f.dim().d == 1) {
    jet.gradient.z() = 0.0;
    jet.hessian.row(2).setZero();
    jet.hessian.col(2).setZero();
  }
  return jet;
}

Vec3 hessian_apply(const SupportField& f, const Vec3& u, const Vec3& X) {
  require_unit(u);
  if (std::abs(u.dot(X)) > 1e-10 * (1.0 + X.norm()))
    throw std::domain_error("hessian_apply: X is not tangent at u");
  FieldJet jet = field_jet(f, u);
  return jet.hessian * X;
}

std::size_t antipode_index(const QuadratureRule& rule, std::size_t i) {
  if (rule.dim.d == 1) {
    std::size_t n = rule.size();
    return (i + n / 2) % n;
  }
  std::size_t nphi = 2 * std::size_t(rule.degree_cap) + 2;
  std::size_t nz = std::size_t(rule.degree_cap) + 1;
  std::size_t iz = i / nphi, ip = i % nphi;
  return (nz - 1 - iz) * nphi + (ip + nphi / 2) % nphi;
}

NodeJets node_jets(const SupportField& f, const QuadratureRule& rule, JetLevel level) {
  if (rule.dim.d != f.dim().d) throw std::invalid_argument("node_jets: dimension mismatch");
  NodeJets out;
  out.values.resize(rule.size());
  bool want_g = level != JetLevel::value;
  bool want_h = level == JetLevel::hessian;
  if (want_g) out.gradients.resize(rule.size());
  if (want_h) out.hessians.resize(rule.size());

  auto finish = [&](std::size_t i, const Vec3& u, double val, const Vec3& g, const Mat3& H) {
    out.values[i] = val;
    if (!want_g) return;
    Vec3 sg = tangent_project(u, g);
    if (f.dim().d == 1) sg.z() = 0.0;
    out.gradients[i] = sg;
    if (!want_h) return;
    Mat3 P = Mat3::Identity() - u * u.transpose();
    Mat3 ch = P * H * P - u.dot(g) * P;
    if (f.dim().d == 1) {
      ch.row(2).setZero();
      ch.col(2).setZero();
    }
    out.hessians[i] = ch;
  };

  if (f.dim().d == 1) {
    parallel_for(rule.size(), [&](std::size_t i) {
      const Vec3& u = rule.nodes[i];
      double val = 0;
      Vec3 g = Vec3::Zero();
      Mat3 H = Mat3::Zero();
      const auto& c = f.coeffs();
      walk_basis(f.dim(), f.degree_cap(), u, want_g, want_h,
                 [&](int k, double v, const Vec3& gk, const Mat3& Hk) {
                   val += c(k) * v;
                   if (want_g) g += c(k) * gk;
                   if (want_h) H += c(k) * Hk;
                 });
      finish(i, u, val, g, H);
    });
    return out;
  }

  // d=2: share the latitude tables across each ring, reduce over m per node.
  int L = f.degree_cap();
  int nphi = 2 * rule.degree_cap + 2;
  int nz = rule.degree_cap + 1;
  const auto& c = f.coeffs();
  parallel_for(std::size_t(nz), [&](std::size_t iz) {
    double z = rule.nodes[iz * nphi].z();
    QbarTables T(L, z, want_g || want_h, want_h);
    // Ring sums over l for each m: value (Sa,Sb), d/dz (Da,Db), d2/dz2.
    Eigen::VectorXd Sa = Eigen::VectorXd::Zero(L + 1), Sb = Eigen::VectorXd::Zero(L + 1);
    Eigen::VectorXd Da, Db, Ea, Eb;
    if (want_g || want_h) {
      Da = Eigen::VectorXd::Zero(L + 1);
      Db = Eigen::VectorXd::Zero(L + 1);
    }
    if (want_h) {
      Ea = Eigen::VectorXd::Zero(L + 1);
      Eb = Eigen::VectorXd::Zero(L + 1);
    }
    for (int m = 0; m <= L; ++m) {
      double fac = (m == 0) ? 1.0 : kSqrt2;
      for (int l = m; l <= L; ++l) {
        int t = T.idx(l, m);
        double ca = c(SupportField::index_d2(l, m));
        double cb = m > 0 ? c(SupportField::index_d2(l, -m)) : 0.0;
        Sa(m) += fac * ca * T.q[t];
        if (m > 0) Sb(m) += fac * cb * T.q[t];
        if (want_g || want_h) {
          Da(m) += fac * ca * T.qp[t];
          if (m > 0) Db(m) += fac * cb * T.qp[t];
        }
        if (want_h) {
          Ea(m) += fac * ca * T.qpp[t];
          if (m > 0) Eb(m) += fac * cb * T.qpp[t];
        }
      }
    }
    std::vector<double> re, im;
    for (int ip = 0; ip < nphi; ++ip) {
      std::size_t i = iz * nphi + ip;
      const Vec3& u = rule.nodes[i];
      complex_powers(u.x(), u.y(), L, re, im);
      double val = 0;
      Vec3 g = Vec3::Zero();
      Mat3 H = Mat3::Zero();
      for (int m = 0; m <= L; ++m) {
        val += Sa(m) * re[m] + (m > 0 ? Sb(m) * im[m] : 0.0);
        if (want_g || want_h) {
          if (m >= 1) {
            g.x() += m * (Sa(m) * re[m - 1] + Sb(m) * im[m - 1]);
            g.y() += m * (-Sa(m) * im[m - 1] + Sb(m) * re[m - 1]);
          }
          g.z() += Da(m) * re[m] + (m > 0 ? Db(m) * im[m] : 0.0);
        }
        if (want_h) {
          if (m >= 2) {
            double s = double(m) * (m - 1);
            H(0, 0) += s * (Sa(m) * re[m - 2] + Sb(m) * im[m - 2]);
            H(0, 1) += s * (-Sa(m) * im[m - 2] + Sb(m) * re[m - 2]);
          }
          if (m >= 1) {
            H(0, 2) += m * (Da(m) * re[m - 1] + Db(m) * im[m - 1]);
            H(1, 2) += m * (-Da(m) * im[m - 1] + Db(m) * re[m - 1]);
          }
          H(2, 2) += Ea(m) * re[m] + (m > 0 ? Eb(m) * im[m] : 0.0);
        }
      }
      if (want_h) {
        H(1, 1) = -H(0, 0);
        H(1, 0) = H(0, 1);
        H(2, 0) = H(0, 2);
        H(2, 1) = H(1, 2);
      }
      finish(i, u, val, g, H);
    }
  });
  return out;
}

}  // namespace copscan
