#include "copscan/tube.hpp"

#include <cmath>

namespace copscan {

namespace {

SupportField base_section_field(const SphereDim& dim, const TubeParams& params, int L) {
  if (params.base_coeffs) {
    return SupportField(dim, L, *params.base_coeffs);
  }
  if (params.lambda.size() != dim.section_ambient())
    throw std::invalid_argument("tube params: lambda needs " +
                                std::to_string(dim.section_ambient()) + " entries");
  if ((params.lambda.array() <= 0).any())
    throw std::invalid_argument("tube params: lambda must be positive");
  return ellipsoid_support(EllipsoidSpec::axis_aligned(dim, params.lambda), L).body.h;
}

std::pair<double, double> family_window(TubeFamily family, const TubeParams& params) {
  if (params.window) return *params.window;
  if (family == TubeFamily::cone) return {-0.9, -0.1};
  if (family == TubeFamily::ellipsoid) return {-0.9 * params.height_axis, 0.9 * params.height_axis};
  return {-0.9, 0.9};
}

// Split family: section(z) = r(z) * base, section_dz = r'(z) * base.
TubeSpec make_split_tube(const SphereDim& dim, TubeFamily family, const TubeParams& params,
                         int L, std::function<double(double)> r,
                         std::function<double(double)> r_prime) {
  TubeSpec t;
  t.dim = dim;
  t.degree_cap = L;
  t.family = family;
  t.params = params;
  auto window = family_window(family, params);
  t.z_lo = window.first;
  t.z_hi = window.second;
  auto base = std::make_shared<SupportField>(base_section_field(dim, params, L));
  t.section = [base, r](double z) { return r(z) * (*base); };
  t.section_dz = [base, r_prime](double z) { return r_prime(z) * (*base); };
  t.center = [](double) { return Vec3::Zero(); };
  t.center_dz = [](double) { return Vec3::Zero(); };
  return t;
}

}  // namespace

const char* to_string(TubeFamily f) {
  switch (f) {
    case TubeFamily::cylinder: return "cylinder";
    case TubeFamily::ellipsoid: return "ellipsoid";
    case TubeFamily::tube_hyperboloid: return "tube_hyperboloid";
    case TubeFamily::convex_hyperboloid: return "convex_hyperboloid";
    case TubeFamily::paraboloid: return "paraboloid";
    case TubeFamily::cone: return "cone";
    case TubeFamily::twisted: return "twisted";
    case TubeFamily::bent: return "bent";
    case TubeFamily::odd_perturbed: return "odd_perturbed";
    case TubeFamily::affine_image: return "affine_image";
  }
  return "?";
}

TubeFamily tube_family_from_string(const std::string& s) {
  for (TubeFamily f :
       {TubeFamily::cylinder, TubeFamily::ellipsoid, TubeFamily::tube_hyperboloid,
        TubeFamily::convex_hyperboloid, TubeFamily::paraboloid, TubeFamily::cone,
        TubeFamily::twisted, TubeFamily::bent, TubeFamily::odd_perturbed,
        TubeFamily::affine_image}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown tube family: " + s);
}

SupportField rotate_about_axis(const SupportField& f, double alpha) {
  SupportField out = f;
  int L = f.degree_cap();
  if (f.dim().d == 1) {
    for (int m = 1; m <= L; ++m) {
      double ca = std::cos(m * alpha), sa = std::sin(m * alpha);
      double a = f.coeffs()(SupportField::index_d1(m, false));
      double b = f.coeffs()(SupportField::index_d1(m, true));
      out.coeffs()(SupportField::index_d1(m, false)) = a * ca - b * sa;
      out.coeffs()(SupportField::index_d1(m, true)) = a * sa + b * ca;
    }
    return out;
  }
  for (int l = 1; l <= L; ++l) {
    for (int m = 1; m <= l; ++m) {
      double ca = std::cos(m * alpha), sa = std::sin(m * alpha);
      double a = f.coeffs()(SupportField::index_d2(l, m));
      double b = f.coeffs()(SupportField::index_d2(l, -m));
      out.coeffs()(SupportField::index_d2(l, m)) = a * ca - b * sa;
      out.coeffs()(SupportField::index_d2(l, -m)) = a * sa + b * ca;
    }
  }
  return out;
}

SupportField rotate_rate_about_axis(const SupportField& f, double alpha) {
  SupportField rot = rotate_about_axis(f, alpha);
  SupportField out(f.dim(), f.degree_cap());
  int L = f.degree_cap();
  if (f.dim().d == 1) {
    for (int m = 1; m <= L; ++m) {
      double a = rot.coeffs()(SupportField::index_d1(m, false));
      double b = rot.coeffs()(SupportField::index_d1(m, true));
      out.coeffs()(SupportField::index_d1(m, false)) = -m * b;
      out.coeffs()(SupportField::index_d1(m, true)) = m * a;
    }
    return out;
  }
  for (int l = 1; l <= L; ++l) {
    for (int m = 1; m <= l; ++m) {
      double a = rot.coeffs()(SupportField::index_d2(l, m));
      double b = rot.coeffs()(SupportField::index_d2(l, -m));
      out.coeffs()(SupportField::index_d2(l, m)) = -m * b;
      out.coeffs()(SupportField::index_d2(l, -m)) = m * a;
    }
  }
  return out;
}

SupportField odd_cubic_probe(const SphereDim& dim, int degree_cap) {
  if (degree_cap < 3) throw std::invalid_argument("odd_cubic_probe: needs L >= 3");
  SupportField g(dim, degree_cap);
  if (dim.d == 1)
    g.coeffs()(SupportField::index_d1(3, false)) = 1.0;
  else
    g.coeffs()(SupportField::index_d2(3, 1)) = 1.0;
  QuadratureRule rule = quadrature_rule(dim, degree_cap);
  NodeJets jets = node_jets(g, rule, JetLevel::gradient);
  double sup = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    sup = std::max(sup, (jets.gradients[i] + jets.values[i] * rule.nodes[i]).norm());
  g *= 1.0 / sup;
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 2 || hi <= lo) throw std::invalid_argument("uniform_grid: bad range");
  std::vector<double> z(count);
  for (int k = 0; k < count; ++k) z[k] = lo + (hi - lo) * k / (count - 1);
  return z;
}

TubeSpec generate(const SphereDim& dim, TubeFamily family, const TubeParams& params,
                  int degree_cap) {
  switch (family) {
    case TubeFamily::cylinder: {
      TubeSpec t = make_split_tube(dim, family, params, degree_cap,
                                   [](double) { return 1.0; }, [](double) { return 0.0; });
      Vec3 tilt = params.tilt;
      t.center = [tilt](double z) { return Vec3(tilt * z); };
      t.center_dz = [tilt](double) { return tilt; };
      return t;
    }
    case TubeFamily::ellipsoid: {
      double lz = params.height_axis;
      if (lz <= 0) throw std::invalid_argument("ellipsoid tube: height_axis must be positive");
      auto window = family_window(family, params);
      if (window.first <= -lz || window.second >= lz)
        throw invalid_tube_error("ellipsoid tube: window reaches the poles z = ±" +
                                 std::to_string(lz));
      return make_split_tube(
          dim, family, params, degree_cap,
          [lz](double z) { return std::sqrt(1.0 - (z / lz) * (z / lz)); },
          [lz](double z) { return -z / (lz * lz * std::sqrt(1.0 - (z / lz) * (z / lz))); });
    }
    case TubeFamily::tube_hyperboloid: {
      double b = params.b;
      if (b <= 0) throw std::invalid_argument("tube hyperboloid: b must be positive");
      return make_split_tube(
          dim, family, params, degree_cap,
          [b](double z) { return std::sqrt(1.0 + (z / b) * (z / b)); },
          [b](double z) { return z / (b * b * std::sqrt(1.0 + (z / b) * (z / b))); });
    }
    case TubeFamily::convex_hyperboloid: {
      double b = params.b, z0 = params.offset == 0.0 ? -3.0 : params.offset;
      if (b <= 0) throw std::invalid_argument("convex hyperboloid: b must be positive");
      auto window = family_window(family, params);
      auto r2 = [b, z0](double z) {
        double s = (z - z0) / b;
        return s * s - 1.0;
      };
      if (r2(window.first) <= 0 || r2(window.second) <= 0)
        throw invalid_tube_error("convex hyperboloid: window crosses the vertex sheet gap");
      return make_split_tube(
          dim, family, params, degree_cap, [r2](double z) { return std::sqrt(r2(z)); },
          [b, z0, r2](double z) { return (z - z0) / (b * b * std::sqrt(r2(z))); });
    }
    case TubeFamily::paraboloid: {
      double z0 = params.offset == 0.0 ? -2.0 : params.offset;
      auto window = family_window(family, params);
      if (window.first <= z0)
        throw invalid_tube_error("paraboloid: window reaches the vertex at z = " +
                                 std::to_string(z0));
      return make_split_tube(
          dim, family, params, degree_cap,
          [z0](double z) { return std::sqrt(z - z0); },
          [z0](double z) { return 0.5 / std::sqrt(z - z0); });
    }
    case TubeFamily::cone: {
      double k = params.slope, z0 = params.offset;
      if (k <= 0) throw std::invalid_argument("cone: slope must be positive");
      auto window = family_window(family, params);
      if (window.first <= z0 && z0 <= window.second)
        throw invalid_tube_error("cone: window contains the apex at z = " + std::to_string(z0));
      return make_split_tube(
          dim, family, params, degree_cap,
          [k, z0](double z) { return k * std::abs(z - z0); },
          [k, z0](double z) { return z > z0 ? k : -k; });
    }
    case TubeFamily::twisted: {
      TubeSpec t = make_split_tube(dim, family, params, degree_cap,
                                   [](double) { return 1.0; }, [](double) { return 0.0; });
      auto base = std::make_shared<SupportField>(base_section_field(dim, params, degree_cap));
      double omega = params.omega;
      t.section = [base, omega](double z) { return rotate_about_axis(*base, omega * z); };
      t.section_dz = [base, omega](double z) {
        return omega * rotate_rate_about_axis(*base, omega * z);
      };
      return t;
    }
    case TubeFamily::bent: {
      TubeSpec t = make_split_tube(dim, family, params, degree_cap,
                                   [](double) { return 1.0; }, [](double) { return 0.0; });
      Vec3 bend = params.bend;
      t.center = [bend](double z) { return Vec3(bend * z * z); };
      t.center_dz = [bend](double z) { return Vec3(2.0 * bend * z); };
      return t;
    }
    case TubeFamily::odd_perturbed: {
      TubeSpec t = make_split_tube(dim, family, params, degree_cap,
                                   [](double) { return 1.0; }, [](double) { return 0.0; });
      auto base = std::make_shared<SupportField>(base_section_field(dim, params, degree_cap));
      auto probe = std::make_shared<SupportField>(odd_cubic_probe(dim, degree_cap));
      // amplitude ramps along the axis, so the perturbation breaks splitting
      // as well as sectional symmetry
      double a = params.amplitude;
      t.section = [base, probe, a](double z) {
        return *base + (a * (1.0 + 0.5 * z)) * (*probe);
      };
      t.section_dz = [probe, a](double) { return (0.5 * a) * (*probe); };
      return t;
    }
    case TubeFamily::affine_image:
      throw std::invalid_argument("affine_image tubes are built with apply_affine()");
  }
  throw std::invalid_argument("unknown tube family");
}

TubeSpec apply_affine(const TubeSpec& base, const SliceAffine& map) {
  int m = base.dim.section_ambient();
  if (map.A.rows() != m || map.A.cols() != m)
    throw std::invalid_argument("apply_affine: A must be section-ambient square");
  if (std::abs(map.A.determinant()) < 1e-12)
    throw std::invalid_argument("apply_affine: A is singular");
  if (map.z_scale <= 0) throw std::invalid_argument("apply_affine: z_scale must be positive");

  TubeSpec t;
  t.dim = base.dim;
  t.degree_cap = base.degree_cap;
  t.family = TubeFamily::affine_image;
  t.params = base.params;
  t.affine_base = std::make_shared<TubeSpec>(base);
  t.affine_map = map;
  t.z_lo = map.z_scale * base.z_lo + map.z_shift;
  t.z_hi = map.z_scale * base.z_hi + map.z_shift;

  auto held = t.affine_base;
  SliceAffine mp = map;
  QuadratureRule rule = quadrature_rule(base.dim, base.degree_cap);
  auto rule_ptr = std::make_shared<QuadratureRule>(std::move(rule));
  int mm = m;

  // h_{A K}(u) = |A^T u| h_K(A^T u / |A^T u|), sampled and re-projected.
  auto transform_field = [held, mp, rule_ptr, mm](const SupportField& inner) {
    std::vector<double> samples(rule_ptr->size());
    for (std::size_t i = 0; i < rule_ptr->size(); ++i) {
      const Vec3& u = rule_ptr->nodes[i];
      Eigen::VectorXd w = mp.A.transpose() * u.head(mm);
      double nw = w.norm();
      Vec3 what = Vec3::Zero();
      what.head(mm) = w / nw;
      samples[i] = nw * synthesize(inner, what);
    }
    return analyze(inner.dim(), inner.degree_cap(), samples, *rule_ptr);
  };

  t.section = [held, mp, transform_field](double zp) {
    double z = (zp - mp.z_shift) / mp.z_scale;
    return transform_field(held->section(z));
  };
  t.section_dz = [held, mp, transform_field](double zp) {
    double z = (zp - mp.z_shift) / mp.z_scale;
    SupportField g = transform_field(held->section_dz(z));
    return (1.0 / mp.z_scale) * g;
  };
  t.center = [held, mp, mm](double zp) {
    double z = (zp - mp.z_shift) / mp.z_scale;
    Vec3 c = Vec3::Zero();
    c.head(mm) = mp.A * held->center(z).head(mm);
    return Vec3(c + mp.shear * zp + mp.offset);
  };
  t.center_dz = [held, mp, mm](double zp) {
    double z = (zp - mp.z_shift) / mp.z_scale;
    Vec3 c = Vec3::Zero();
    c.head(mm) = mp.A * held->center_dz(z).head(mm) / mp.z_scale;
    return Vec3(c + mp.shear);
  };
  return t;
}

int TransverseSupport::index_nearest(double z) const {
  int best = 0;
  double dist = std::abs(z_grid[0] - z);
  for (std::size_t k = 1; k < z_grid.size(); ++k) {
    double d = std::abs(z_grid[k] - z);
    if (d < dist) {
      dist = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

TransverseSupport transverse_support(const TubeSpec& t, const std::vector<double>& z_grid,
                                     int degree_cap) {
  for (double z : z_grid)
    if (z < t.z_lo - 1e-12 || z > t.z_hi + 1e-12)
      throw std::invalid_argument("transverse_support: grid height " + std::to_string(z) +
                                  " outside tube range");
  TransverseSupport ts;
  ts.dim = t.dim;
  ts.degree_cap = degree_cap;
  ts.z_grid = z_grid;
  ts.source = std::make_shared<TubeSpec>(t);
  std::size_t K = z_grid.size();
  ts.fields.reserve(K);
  ts.dz_fields.reserve(K);
  ts.centers.resize(K);
  ts.section_margins.resize(K);
  ts.analytic_dz = static_cast<bool>(t.section_dz);

  QuadratureRule rule = quadrature_rule(t.dim, degree_cap);
  std::vector<SupportField> raw;
  raw.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    SupportField sec = t.section(z_grid[k]);
    if (sec.degree_cap() != degree_cap) {
      // re-project onto the requested cap
      NodeJets vals = node_jets(sec, rule, JetLevel::value);
      sec = analyze(t.dim, degree_cap, vals.values, rule);
    }
    raw.push_back(sec + SupportField::linear(t.dim, degree_cap, t.center(z_grid[k])));
  }
  std::vector<SupportField> centered;
  centered.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    CentrixReport rep = centrix(raw[k], rule);
    ts.centers[k] = rep.mean_center;
    centered.push_back(translate_support(raw[k], rep.mean_center));
  }
  for (std::size_t k = 0; k < K; ++k) {
    NodeJets vals = node_jets(centered[k], rule, JetLevel::value);
    if (*std::min_element(vals.values.begin(), vals.values.end()) <= 0)
      throw invalid_tube_error("section at z = " + std::to_string(z_grid[k]) +
                               " has non-positive support about its center");
    OvaloidCheckResult chk = ovaloid_check(centered[k]);
    ts.section_margins[k] = chk.margin;
    if (!chk.ok)
      throw invalid_tube_error("section at z = " + std::to_string(z_grid[k]) +
                               " fails ovaloid_check (margin " + std::to_string(chk.margin) +
                               ")");
    ts.fields.push_back(centered[k]);
  }

  if (ts.analytic_dz) {
    for (std::size_t k = 0; k < K; ++k) {
      SupportField g = t.section_dz(z_grid[k]);
      if (g.degree_cap() != degree_cap) {
        NodeJets vals = node_jets(g, rule, JetLevel::value);
        g = analyze(t.dim, degree_cap, vals.values, rule);
      }
      // The stored fields are raw sections minus their centrix mean; the mean
      // tracks the generator center, so d/dz of the centered field is the
      // generator's section_dz.
      ts.dz_fields.push_back(g);
    }
  } else {
    // 4th-order central differences on coefficients; defined on interior
    // heights only (zero placeholders at the edges).
    double dz = z_grid.size() > 1 ? z_grid[1] - z_grid[0] : 1.0;
    for (std::size_t k = 2; k + 1 < K; ++k) {
      if (std::abs((z_grid[k] - z_grid[k - 1]) - dz) > 1e-9 * std::max(1.0, std::abs(dz)))
        throw std::invalid_argument("transverse_support: finite-difference d/dz needs a uniform grid");
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (k >= 2 && k + 2 < K) {
        SupportField g = (1.0 / (12.0 * dz)) *
                         (-1.0 * ts.fields[k + 2] + 8.0 * ts.fields[k + 1] -
                          8.0 * ts.fields[k - 1] + 1.0 * ts.fields[k - 2]);
        ts.dz_fields.push_back(g);
      } else {
        ts.dz_fields.push_back(SupportField(t.dim, degree_cap));
      }
    }
  }

  // contraction-guard bound: sup |dGamma/dz| over grid and nodes
  double bound = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!ts.analytic_dz && !(k >= 2 && k + 2 < K)) continue;
    NodeJets jets = node_jets(ts.dz_fields[k], rule, JetLevel::gradient);
    Vec3 cdz = t.center_dz ? t.center_dz(z_grid[k]) : Vec3::Zero();
    for (std::size_t i = 0; i < rule.size(); ++i) {
      Vec3 gdz = jets.gradients[i] + jets.values[i] * rule.nodes[i] + cdz;
      bound = std::max(bound, gdz.norm());
    }
  }
  ts.gamma_dz_bound = bound;
  return ts;
}

TransverseSupport transverse_support(const TubeSpec& t, int grid_count) {
  return transverse_support(t, uniform_grid(t.z_lo, t.z_hi, grid_count), t.degree_cap);
}

SplitResult split_test(const TransverseSupport& ts) {
  if (ts.z_grid.size() < 3) throw std::invalid_argument("split_test: needs >= 3 heights");
  SplitResult res{Eigen::VectorXd::Ones(ts.z_grid.size()),
                  ts.fields[std::size_t(ts.index_nearest(0.0))], 0.0, ts.index_nearest(0.0)};
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  NodeJets h0 = node_jets(res.h0, rule, JetLevel::value);
  double sup_h0 = 0;
  for (double v : h0.values) sup_h0 = std::max(sup_h0, std::abs(v));
  for (std::size_t k = 0; k < ts.z_grid.size(); ++k) {
    NodeJets hk = node_jets(ts.fields[k], rule, JetLevel::value);
    std::vector<double> ratios(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) ratios[i] = hk.values[i] / h0.values[i];
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    double med = ratios[ratios.size() / 2];
    if (ratios.size() % 2 == 0) {
      double lo = *std::max_element(ratios.begin(), ratios.begin() + ratios.size() / 2);
      med = 0.5 * (med + lo);
    }
    res.r(k) = med;
    for (std::size_t i = 0; i < rule.size(); ++i)
      res.residual =
          std::max(res.residual, std::abs(hk.values[i] - med * h0.values[i]) / sup_h0);
  }
  return res;
}

}  // namespace copscan
