#include "copscan/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

namespace copscan {

namespace {

json vec_to_json(const Vec3& v, int ncomp) {
  json a = json::array();
  for (int i = 0; i < ncomp; ++i) a.push_back(v(i));
  return a;
}

Vec3 vec_from_json(const json& j) {
  Vec3 v = Vec3::Zero();
  if (!j.is_array() || j.size() > 3) throw schema_error("expected a vector of <= 3 entries");
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw schema_error(where + ": missing key '" + key + "'");
  return *it;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const SupportField& f) {
  json j;
  j["dim"] = f.dim().d;
  j["L"] = f.degree_cap();
  j["coeffs"] = std::vector<double>(f.coeffs().data(), f.coeffs().data() + f.coeffs().size());
  return j;
}

SupportField support_field_from_json(const json& j) {
  SphereDim dim(need(j, "dim", "SupportField").get<int>());
  int L = need(j, "L", "SupportField").get<int>();
  auto c = need(j, "coeffs", "SupportField").get<std::vector<double>>();
  if (static_cast<int>(c.size()) != SupportField::coeff_count(dim, L))
    throw schema_error("SupportField.coeffs: expected " +
                       std::to_string(SupportField::coeff_count(dim, L)) + " entries, got " +
                       std::to_string(c.size()));
  return SupportField(dim, L, Eigen::Map<Eigen::VectorXd>(c.data(), c.size()));
}

void save_coeffs_binary(const SupportField& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "binary dumps assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(reinterpret_cast<const char*>(f.coeffs().data()),
            std::streamsize(sizeof(double)) * f.coeffs().size());
}

SupportField load_coeffs_binary(const SphereDim& dim, int degree_cap, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Eigen::VectorXd c(SupportField::coeff_count(dim, degree_cap));
  in.read(reinterpret_cast<char*>(c.data()), std::streamsize(sizeof(double)) * c.size());
  if (!in) throw schema_error("binary coefficient file too short: " + path);
  return SupportField(dim, degree_cap, std::move(c));
}

json to_json(const EllipsoidSpec& spec) {
  json j;
  j["lambda"] = std::vector<double>(spec.semi_axes.data(),
                                    spec.semi_axes.data() + spec.semi_axes.size());
  json rot = json::array();
  for (int r = 0; r < spec.rotation.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < spec.rotation.cols(); ++c) row.push_back(spec.rotation(r, c));
    rot.push_back(row);
  }
  j["rotation"] = rot;
  j["center"] =
      std::vector<double>(spec.center.data(), spec.center.data() + spec.center.size());
  return j;
}

EllipsoidSpec ellipsoid_spec_from_json(const json& j) {
  auto lam = need(j, "lambda", "EllipsoidSpec").get<std::vector<double>>();
  EllipsoidSpec spec;
  if (lam.size() != 2 && lam.size() != 3)
    throw schema_error("EllipsoidSpec.lambda: expected 2 or 3 entries");
  spec.dim = SphereDim(static_cast<int>(lam.size()) - 1);
  spec.semi_axes = Eigen::Map<Eigen::VectorXd>(lam.data(), lam.size());
  int m = spec.dim.section_ambient();
  spec.rotation = Eigen::MatrixXd::Identity(m, m);
  spec.center = Eigen::VectorXd::Zero(m);
  if (j.contains("rotation")) {
    const json& rot = j["rotation"];
    if (static_cast<int>(rot.size()) != m) throw schema_error("EllipsoidSpec.rotation: shape");
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) spec.rotation(r, c) = rot[r][c].get<double>();
  }
  if (j.contains("center")) {
    auto cen = j["center"].get<std::vector<double>>();
    if (static_cast<int>(cen.size()) != m) throw schema_error("EllipsoidSpec.center: shape");
    spec.center = Eigen::Map<Eigen::VectorXd>(cen.data(), cen.size());
  }
  spec.validate();
  return spec;
}

json to_json(const TubeSpec& t) {
  json j;
  j["dim"] = t.dim.d;
  j["L"] = t.degree_cap;
  j["family"] = to_string(t.family);
  j["z_range"] = {t.z_lo, t.z_hi};
  json p;
  int m = t.dim.section_ambient();
  if (t.family == TubeFamily::affine_image) {
    p["base"] = to_json(*t.affine_base);
    const SliceAffine& map = *t.affine_map;
    json A = json::array();
    for (int r = 0; r < m; ++r) {
      json row = json::array();
      for (int c = 0; c < m; ++c) row.push_back(map.A(r, c));
      A.push_back(row);
    }
    p["A"] = A;
    p["shear"] = vec_to_json(map.shear, m);
    p["offset"] = vec_to_json(map.offset, m);
    p["z_scale"] = map.z_scale;
    p["z_shift"] = map.z_shift;
  } else {
    if (t.params.lambda.size() > 0)
      p["lambda"] = std::vector<double>(t.params.lambda.data(),
                                        t.params.lambda.data() + t.params.lambda.size());
    if (t.params.base_coeffs)
      p["base_coeffs"] = std::vector<double>(
          t.params.base_coeffs->data(),
          t.params.base_coeffs->data() + t.params.base_coeffs->size());
    switch (t.family) {
      case TubeFamily::ellipsoid: p["height_axis"] = t.params.height_axis; break;
      case TubeFamily::tube_hyperboloid: p["b"] = t.params.b; break;
      case TubeFamily::convex_hyperboloid:
        p["b"] = t.params.b;
        p["offset"] = t.params.offset;
        break;
      case TubeFamily::paraboloid: p["offset"] = t.params.offset; break;
      case TubeFamily::cone:
        p["slope"] = t.params.slope;
        p["offset"] = t.params.offset;
        break;
      case TubeFamily::twisted: p["omega"] = t.params.omega; break;
      case TubeFamily::bent: p["bend"] = vec_to_json(t.params.bend, m); break;
      case TubeFamily::odd_perturbed: p["amplitude"] = t.params.amplitude; break;
      case TubeFamily::cylinder: p["tilt"] = vec_to_json(t.params.tilt, m); break;
      default: break;
    }
  }
  j["params"] = p;
  return j;
}

TubeSpec tube_spec_from_json(const json& j) {
  SphereDim dim(need(j, "dim", "TubeSpec").get<int>());
  int L = need(j, "L", "TubeSpec").get<int>();
  TubeFamily family = tube_family_from_string(need(j, "family", "TubeSpec").get<std::string>());
  const json& p = need(j, "params", "TubeSpec");
  int m = dim.section_ambient();

  if (family == TubeFamily::affine_image) {
    TubeSpec base = tube_spec_from_json(need(p, "base", "TubeSpec.params"));
    SliceAffine map;
    map.A = Eigen::MatrixXd::Identity(m, m);
    const json& A = need(p, "A", "TubeSpec.params");
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) map.A(r, c) = A[r][c].get<double>();
    if (p.contains("shear")) map.shear = vec_from_json(p["shear"]);
    if (p.contains("offset")) map.offset = vec_from_json(p["offset"]);
    if (p.contains("z_scale")) map.z_scale = p["z_scale"].get<double>();
    if (p.contains("z_shift")) map.z_shift = p["z_shift"].get<double>();
    return apply_affine(base, map);
  }

  TubeParams params;
  if (p.contains("lambda")) {
    auto lam = p["lambda"].get<std::vector<double>>();
    if (static_cast<int>(lam.size()) != m)
      throw schema_error("TubeSpec.params.lambda: expected " + std::to_string(m) + " entries");
    params.lambda = Eigen::Map<Eigen::VectorXd>(lam.data(), lam.size());
  }
  if (p.contains("base_coeffs")) {
    auto c = p["base_coeffs"].get<std::vector<double>>();
    params.base_coeffs = Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
  }
  if (p.contains("height_axis")) params.height_axis = p["height_axis"].get<double>();
  if (p.contains("b")) params.b = p["b"].get<double>();
  if (p.contains("offset")) params.offset = p["offset"].get<double>();
  if (p.contains("slope")) params.slope = p["slope"].get<double>();
  if (p.contains("omega")) params.omega = p["omega"].get<double>();
  if (p.contains("amplitude")) params.amplitude = p["amplitude"].get<double>();
  if (p.contains("tilt")) params.tilt = vec_from_json(p["tilt"]);
  if (p.contains("bend")) params.bend = vec_from_json(p["bend"]);
  if (j.contains("z_range")) {
    auto zr = j["z_range"].get<std::vector<double>>();
    if (zr.size() != 2) throw schema_error("TubeSpec.z_range: expected [lo, hi]");
    params.window = {zr[0], zr[1]};
  }
  return generate(dim, family, params, L);
}

TubeSpec load_tube_spec(const std::string& path) {
  return tube_spec_from_json(read_json_file(path));
}

void save_tube_spec(const TubeSpec& t, const std::string& path) {
  write_text_file(path, to_json(t).dump(2) + "\n");
}

json to_json(const CentrixReport& rep, const QuadratureRule& rule) {
  json j;
  int m = rule.dim.section_ambient();
  j["mean_center"] = vec_to_json(rep.mean_center, m);
  j["sup_deviation"] = rep.sup_deviation;
  json nodes = json::array();
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    json row;
    row["u"] = vec_to_json(rule.nodes[i], m);
    row["centrix"] = vec_to_json(rep.values[i], m);
    row["deviation"] = (rep.values[i] - rep.mean_center).norm();
    nodes.push_back(row);
  }
  j["nodes"] = nodes;
  return j;
}

json to_json(const EllipsoidTestReport& rep) {
  json j;
  j["constant_value"] = rep.constant_value;
  j["gradient_sup"] = rep.gradient_sup;
  j["gradient_rel"] = rep.gradient_rel;
  j["fit_residual"] = rep.fit_residual;
  j["accepted"] = rep.accepted;
  json B = json::array();
  for (int r = 0; r < rep.B.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < rep.B.cols(); ++c) row.push_back(rep.B(r, c));
    B.push_back(row);
  }
  j["B"] = B;
  if (rep.semi_axes.size() > 0)
    j["semi_axes"] = std::vector<double>(rep.semi_axes.data(),
                                         rep.semi_axes.data() + rep.semi_axes.size());
  return j;
}

json to_json(const AffineTestReport& rep) {
  json j;
  j["max_second_difference"] = rep.max_second_difference;
  j["rel"] = rep.rel;
  j["is_affine"] = rep.is_affine;
  j["line_base"] = vec_to_json(rep.line_base, 3);
  j["line_dir"] = vec_to_json(rep.line_dir, 3);
  return j;
}

json to_json(const Classification& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  if (c.quadric) j["quadric_family"] = to_string(*c.quadric);
  j["ambient_dimension"] = c.ambient_dimension;
  j["detail"] = c.detail;
  json certs;
  certs["max_section_centrality_rel"] = c.certificates.max_section_centrality_rel;
  certs["pde1_rel"] = c.certificates.pde1_rel;
  certs["pde2_rel"] = c.certificates.pde2_rel;
  certs["obstruction_max_rel"] = c.certificates.obstruction_max_rel;
  certs["split_residual"] = c.certificates.split_residual;
  certs["max_r_deviation_from_1"] = c.certificates.max_r_deviation_from_1;
  if (c.certificates.ellipsoid) certs["ellipsoid"] = to_json(*c.certificates.ellipsoid);
  if (c.certificates.axis) certs["axis"] = to_json(*c.certificates.axis);
  if (c.certificates.r2_fit) {
    certs["r2_fit"] = {{"a", c.certificates.r2_fit->a},
                       {"b", c.certificates.r2_fit->b},
                       {"c", c.certificates.r2_fit->c},
                       {"residual", c.certificates.r2_fit->residual}};
    certs["family_margin"] = c.certificates.family_margin;
  }
  j["certificates"] = certs;
  if (c.witness) {
    json w;
    w["stage"] = c.witness->stage;
    w["tau"] = vec_to_json(c.witness->tau, 3);
    w["z"] = c.witness->z;
    w["u"] = vec_to_json(c.witness->u, 3);
    w["magnitude"] = c.witness->magnitude;
    j["witness"] = w;
  }
  return j;
}

json to_json(const SectionReport& rep) {
  json j;
  j["tau"] = vec_to_json(rep.plane.tau, 3);
  j["z0"] = rep.plane.z0;
  j["eps"] = rep.plane.eps;
  j["center"] = vec_to_json(rep.center, 3);
  j["sup_deviation"] = rep.sup_deviation;
  j["diameter"] = rep.diameter;
  j["h_eps"] = to_json(rep.h_eps);
  return j;
}

void write_transverse_csv(const TransverseSupport& ts, const std::string& path) {
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  std::string body = "z,node,h\n";
  for (std::size_t k = 0; k < ts.z_grid.size(); ++k) {
    NodeJets vals = node_jets(ts.fields[k], rule, JetLevel::value);
    for (std::size_t i = 0; i < rule.size(); ++i)
      body += fmt(ts.z_grid[k]) + "," + std::to_string(i) + "," + fmt(vals.values[i]) + "\n";
  }
  write_text_file(path, body);
}

json transverse_coefficients_json(const TransverseSupport& ts) {
  json j;
  j["dim"] = ts.dim.d;
  j["L"] = ts.degree_cap;
  j["z_grid"] = ts.z_grid;
  json fields = json::array();
  json centers = json::array();
  for (std::size_t k = 0; k < ts.z_grid.size(); ++k) {
    fields.push_back(std::vector<double>(
        ts.fields[k].coeffs().data(),
        ts.fields[k].coeffs().data() + ts.fields[k].coeffs().size()));
    centers.push_back(vec_to_json(ts.centers[k], ts.dim.section_ambient()));
  }
  j["coefficients"] = fields;
  j["centers"] = centers;
  return j;
}

void write_obstruction_csv(const GridVectorField& V, const GridScalarField& S,
                           const TransverseSupport& ts, const std::vector<Vec3>& taus,
                           const std::string& path) {
  QuadratureRule rule = quadrature_rule(ts.dim, ts.degree_cap);
  int m = ts.dim.section_ambient();
  std::string body = "z,node";
  for (int a = 0; a < m; ++a) body += ",V" + std::to_string(a);
  body += ",S";
  for (std::size_t t = 0; t < taus.size(); ++t) body += ",f_tau" + std::to_string(t);
  body += "\n";
  for (std::size_t t = 0; t < V.values.size(); ++t) {
    double z = ts.z_grid[std::size_t(V.z_index[t])];
    for (std::size_t i = 0; i < rule.size(); ++i) {
      body += fmt(z) + "," + std::to_string(i);
      for (int a = 0; a < m; ++a) body += "," + fmt(V.values[t][i](a));
      body += "," + fmt(S.values[t][i]);
      for (const Vec3& tau : taus) {
        double f = tau.dot(V.values[t][i]) + tau.dot(rule.nodes[i]) * S.values[t][i];
        body += "," + fmt(f);
      }
      body += "\n";
    }
  }
  write_text_file(path, body);
}

void write_section_csv(const SectionReport& rep, const QuadratureRule& rule,
                       const std::string& path) {
  int m = rule.dim.section_ambient();
  std::string body = "node";
  for (int a = 0; a < m; ++a) body += ",w" + std::to_string(a);
  body += ",h_eps";
  for (int a = 0; a < m; ++a) body += ",centrix" + std::to_string(a);
  body += "\n";
  NodeJets vals = node_jets(rep.h_eps, rule, JetLevel::value);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    body += std::to_string(i);
    for (int a = 0; a < m; ++a) body += "," + fmt(rule.nodes[i](a));
    body += "," + fmt(vals.values[i]);
    for (int a = 0; a < m; ++a) body += "," + fmt(rep.centrix_values[i](a));
    body += "\n";
  }
  write_text_file(path, body);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << content;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw schema_error("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace copscan
