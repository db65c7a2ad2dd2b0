// copscan: generate transversely convex tubes, probe their tilted sections
// and symmetry obstruction, and classify them as cylinder / quadric / not-cop.
//
// Exit codes: 0 = cop verdict (cylinder or quadric), 2 = NotCop, 1 = error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "copscan/io.hpp"

using namespace copscan;

namespace {

struct CommonOpts {
  std::string spec_path;
  std::string out_dir = ".";
  int L = 0;          // 0: keep the spec's cap
  int grid = 33;
  int sweep = 16;
  std::uint64_t seed = 0x5eed5eedULL;
  std::string thresholds_path;
};

ClassifierConfig make_config(const CommonOpts& opts) {
  ClassifierConfig cfg;
  cfg.degree_cap = opts.L;
  cfg.grid_count = opts.grid;
  cfg.tau_sweep = opts.sweep;
  cfg.seed = opts.seed;
  if (!opts.thresholds_path.empty()) {
    json j = read_json_file(opts.thresholds_path);
    if (j.contains("centrality_rel_tol")) cfg.centrality_rel_tol = j["centrality_rel_tol"];
    if (j.contains("obstruction_tol")) cfg.obstruction_tol = j["obstruction_tol"];
    if (j.contains("axis_tol")) cfg.axis_tol = j["axis_tol"];
    if (j.contains("split_tol")) cfg.split_tol = j["split_tol"];
    if (j.contains("cylinder_tol")) cfg.cylinder_tol = j["cylinder_tol"];
    if (j.contains("ellipsoid_tol")) cfg.ellipsoid_tol = j["ellipsoid_tol"];
    if (j.contains("quadric_fit_tol")) cfg.quadric_fit_tol = j["quadric_fit_tol"];
    if (j.contains("cone_touch_tol")) cfg.cone_touch_tol = j["cone_touch_tol"];
  }
  return cfg;
}

Eigen::VectorXd parse_list(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

Vec3 parse_vec(const std::string& csv) {
  Eigen::VectorXd v = parse_list(csv);
  if (v.size() < 1 || v.size() > 3) throw CLI::ValidationError("expected 1-3 components");
  Vec3 out = Vec3::Zero();
  out.head(v.size()) = v;
  return out;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"support-function analysis of transversely convex tubes"};
  app.require_subcommand(1);

  CommonOpts opts;

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "write a tube spec JSON for a named family");
  std::string family_name, lambda_csv, tilt_csv, bend_csv = "1", window_csv;
  int gen_dim = 0, gen_L = 0;
  double omega = 0.5, amplitude = 0.01, slope = 1.0, offset = 0.0, hyp_b = 1.0,
         height_axis = 1.0;
  std::string gen_out = "tube.json";
  gen->add_option("family", family_name, "cylinder|ellipsoid|tube_hyperboloid|convex_hyperboloid|paraboloid|cone|twisted|bent|odd_perturbed")->required();
  gen->add_option("--lambda", lambda_csv, "section semi-axes, comma separated");
  gen->add_option("--dim", gen_dim, "parameter sphere dimension d (1 or 2)");
  gen->add_option("--L", gen_L, "degree cap (default 64 for d=1, 32 for d=2)");
  gen->add_option("--omega", omega, "twist rate (twisted)");
  gen->add_option("--amplitude", amplitude, "odd perturbation amplitude (odd_perturbed)");
  gen->add_option("--slope", slope, "cone aperture");
  gen->add_option("--offset", offset, "vertex/apex height (cone, paraboloid, convex_hyperboloid)");
  gen->add_option("--b", hyp_b, "hyperboloid scale");
  gen->add_option("--height-axis", height_axis, "ellipsoid semi-axis along e_n");
  gen->add_option("--tilt", tilt_csv, "cylinder axis tilt vector");
  gen->add_option("--bend", bend_csv, "bent-axis coefficient vector");
  gen->add_option("--window", window_csv, "z window lo,hi");
  gen->add_option("--out", gen_out, "output spec path");

  // ---- classify ----
  auto* cls = app.add_subcommand("classify", "run the cylinder/quadric/not-cop pipeline");
  cls->add_option("--spec", opts.spec_path, "tube spec JSON")->required();
  std::string cls_out = "classification.json";
  cls->add_option("--out", cls_out, "report path");

  // ---- obstruction ----
  auto* obs = app.add_subcommand("obstruction", "dump V, S, and f_tau over the grid");
  obs->add_option("--spec", opts.spec_path, "tube spec JSON")->required();
  obs->add_option("--out", opts.out_dir, "output directory");

  // ---- slice ----
  auto* slc = app.add_subcommand("slice", "tilted cross-section report");
  std::string tau_csv = "1,0";
  double z0 = 0.0, eps = 0.0;
  slc->add_option("--spec", opts.spec_path, "tube spec JSON")->required();
  slc->add_option("--tau", tau_csv, "tilt direction");
  slc->add_option("--z0", z0, "plane intercept");
  slc->add_option("--eps", eps, "plane slope");
  slc->add_option("--out", opts.out_dir, "output directory");

  for (auto* sub : {cls, obs, slc}) {
    sub->add_option("--L", opts.L, "degree cap override");
    sub->add_option("--grid", opts.grid, "height count");
    sub->add_option("--sweep", opts.sweep, "tau sweep count");
    sub->add_option("--seed", opts.seed, "sweep seed");
    sub->add_option("--thresholds", opts.thresholds_path, "threshold overrides JSON");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      TubeFamily family = tube_family_from_string(family_name);
      TubeParams params;
      // --lambda for the ellipsoid family lists the full ambient semi-axes;
      // the last entry is the height axis. Other families list the section
      // semi-axes. The sphere dimension follows from the count.
      Eigen::VectorXd lambda;
      if (!lambda_csv.empty()) {
        lambda = parse_list(lambda_csv);
        if (family == TubeFamily::ellipsoid && lambda.size() >= 3) {
          params.height_axis = lambda(lambda.size() - 1);
          lambda.conservativeResize(lambda.size() - 1);
        }
        int inferred = static_cast<int>(lambda.size()) - 1;
        if (inferred != 1 && inferred != 2)
          throw CLI::ValidationError("--lambda needs 2 or 3 section entries");
        if (gen_dim != 0 && gen_dim != inferred)
          throw CLI::ValidationError("--dim disagrees with the --lambda count");
        gen_dim = inferred;
      }
      if (gen_dim == 0) gen_dim = 1;
      SphereDim dim(gen_dim);
      if (lambda.size() == 0) {
        // family defaults; the twisted base must be anisotropic to twist
        lambda = Eigen::VectorXd::Ones(dim.section_ambient());
        if (family == TubeFamily::twisted || family == TubeFamily::cylinder) {
          lambda(0) = 2.0;
          lambda(1) = 3.0;
        } else {
          lambda(1) = 1.3;
        }
      }
      params.lambda = lambda;
      if (gen_L == 0) gen_L = gen_dim == 1 ? 64 : 32;
      params.omega = omega;
      params.amplitude = amplitude;
      params.slope = slope;
      params.offset = offset;
      params.b = hyp_b;
      params.height_axis = height_axis;
      if (!tilt_csv.empty()) params.tilt = parse_vec(tilt_csv);
      if (!bend_csv.empty()) params.bend = parse_vec(bend_csv);
      if (!window_csv.empty()) {
        Eigen::VectorXd w = parse_list(window_csv);
        if (w.size() != 2) throw CLI::ValidationError("--window needs lo,hi");
        params.window = {w(0), w(1)};
      }
      TubeSpec tube = generate(dim, family, params, gen_L);
      save_tube_spec(tube, gen_out);
      // quick validity echo over a coarse grid
      TransverseSupport ts = transverse_support(tube, uniform_grid(tube.z_lo, tube.z_hi, 9),
                                                tube.degree_cap);
      double min_margin = *std::min_element(ts.section_margins.begin(),
                                            ts.section_margins.end());
      std::cout << "wrote " << gen_out << " (family " << to_string(tube.family)
                << ", n = " << tube.dim.tube_ambient()
                << ", min section margin " << min_margin << ")\n";
      return 0;
    }

    TubeSpec tube = load_tube_spec(opts.spec_path);
    if (opts.L > 0) tube.degree_cap = opts.L;
    ClassifierConfig cfg = make_config(opts);

    if (cls->parsed()) {
      Classification result = classify(tube, cfg);
      write_text_file(cls_out, to_json(result).dump(2) + "\n");
      std::cout << to_string(result.verdict);
      if (result.quadric) std::cout << "(" << to_string(*result.quadric) << ")";
      std::cout << "  ->  " << cls_out << "\n";
      return result.is_cop() ? 0 : 2;
    }

    int L = cfg.degree_cap > 0 ? cfg.degree_cap : tube.degree_cap;
    TransverseSupport ts =
        transverse_support(tube, uniform_grid(tube.z_lo, tube.z_hi, cfg.grid_count), L);

    if (obs->parsed()) {
      std::filesystem::create_directories(opts.out_dir);
      GridVectorField V = pde1_residual(ts);
      GridScalarField S = pde2_residual(ts);
      std::vector<Vec3> taus = tau_directions(ts.dim, cfg.tau_sweep, cfg.seed);
      ObstructionSweep sweep = sweep_obstruction(V, S, ts, taus);
      write_obstruction_csv(V, S, ts, taus, join(opts.out_dir, "obstruction.csv"));
      write_transverse_csv(ts, join(opts.out_dir, "transverse.csv"));
      write_text_file(join(opts.out_dir, "transverse_coefficients.json"),
                      transverse_coefficients_json(ts).dump(2) + "\n");
      json summary;
      summary["pde1_rel"] = V.rel_sup;
      summary["pde2_rel"] = S.rel_sup;
      summary["f_tau_max_rel"] = sweep.max_rel;
      summary["witness"] = {{"z", sweep.witness.z},
                            {"magnitude", sweep.witness.magnitude},
                            {"tau", {sweep.witness.tau.x(), sweep.witness.tau.y(),
                                     sweep.witness.tau.z()}}};
      write_text_file(join(opts.out_dir, "obstruction_summary.json"), summary.dump(2) + "\n");
      std::cout << "max relative residual " << sweep.max_rel << "  ->  " << opts.out_dir
                << "\n";
      return 0;
    }

    if (slc->parsed()) {
      std::filesystem::create_directories(opts.out_dir);
      TiltedPlane plane{parse_vec(tau_csv).normalized(), z0, eps};
      SectionReport rep = cross_section(ts, plane);
      QuadratureRule rule = quadrature_rule(ts.dim, L);
      write_section_csv(rep, rule, join(opts.out_dir, "section.csv"));
      json j = to_json(rep);
      bool central = rep.sup_deviation <= cfg.centrality_rel_tol * rep.diameter;
      j["central"] = central;
      write_text_file(join(opts.out_dir, "section.json"), j.dump(2) + "\n");
      std::cout << "sup centrix deviation " << rep.sup_deviation << " ("
                << (central ? "central" : "NOT central") << ")  ->  " << opts.out_dir << "\n";
      return 0;
    }
  } catch (const tilt_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
