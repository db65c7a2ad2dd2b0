#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "copscan/io.hpp"

using namespace copscan;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "copscan_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(COPSCAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return RunResult{WEXITSTATUS(status)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate writes a valid spec file for each family") {
  fs::path dir = work_dir();
  CHECK(run_cli("generate ellipsoid --lambda 1,2,3,1 --out " +
                (dir / "ellipsoid.json").string())
            .exit_code == 0);
  json j = read_json_file((dir / "ellipsoid.json").string());
  CHECK(j["family"] == "ellipsoid");
  CHECK(j["dim"] == 2);
  CHECK(j["params"]["lambda"].size() == 3);

  CHECK(run_cli("generate twisted --omega 0.5 --out " + (dir / "twisted.json").string())
            .exit_code == 0);
  json tw = read_json_file((dir / "twisted.json").string());
  CHECK(tw["family"] == "twisted");
  CHECK(tw["params"]["omega"] == doctest::Approx(0.5));

  CHECK(run_cli("generate cylinder --lambda 2,3 --out " + (dir / "cylinder.json").string())
            .exit_code == 0);
  CHECK(run_cli("generate bent --bend 1,0 --lambda 1,1.3 --out " +
                (dir / "bent.json").string())
            .exit_code == 0);
}

TEST_CASE("generate cone: the apex must stay outside the window") {
  fs::path dir = work_dir();
  CHECK(run_cli("generate cone --window=-0.9,-0.1 --out " + (dir / "cone.json").string())
            .exit_code == 0);
  CHECK(run_cli("generate cone --window=-0.9,0.1 --out " + (dir / "cone_bad.json").string())
            .exit_code == 1);
}

TEST_CASE("classify: exit 0 for cop verdicts, 2 for NotCop, 1 for errors") {
  fs::path dir = work_dir();
  REQUIRE(run_cli("generate cylinder --lambda 2,3 --out " + (dir / "cyl.json").string())
              .exit_code == 0);
  fs::path report = dir / "cyl_class.json";
  CHECK(run_cli("classify --spec " + (dir / "cyl.json").string() + " --out " +
                report.string())
            .exit_code == 0);
  json j = read_json_file(report.string());
  CHECK(j["verdict"] == "CylinderOverCentralOvaloid");

  REQUIRE(run_cli("generate twisted --omega 0.5 --out " + (dir / "tw.json").string())
              .exit_code == 0);
  fs::path twreport = dir / "tw_class.json";
  CHECK(run_cli("classify --spec " + (dir / "tw.json").string() + " --out " +
                twreport.string())
            .exit_code == 2);
  json tw = read_json_file(twreport.string());
  CHECK(tw["verdict"] == "NotCop");
  CHECK(tw.contains("witness"));
  CHECK(tw["witness"]["magnitude"].get<double>() > 1e-2);

  // truncated JSON -> schema error, exit 1
  std::ofstream bad(dir / "bad.json");
  bad << "{ \"family\": \"cyl";
  bad.close();
  CHECK(run_cli("classify --spec " + (dir / "bad.json").string()).exit_code == 1);
}

TEST_CASE("classify quadric families end to end") {
  fs::path dir = work_dir();
  for (std::string family :
       {std::string("ellipsoid"), std::string("tube_hyperboloid"), std::string("paraboloid")}) {
    fs::path spec = dir / (family + ".gen.json");
    REQUIRE(run_cli("generate " + family + " --lambda 1,1.3 --out " + spec.string())
                .exit_code == 0);
    fs::path rep = dir / (family + ".class.json");
    CHECK(run_cli("classify --spec " + spec.string() + " --out " + rep.string()).exit_code ==
          0);
    json j = read_json_file(rep.string());
    CHECK(j["verdict"] == "Quadric");
    CHECK(j["quadric_family"] == family);
  }
}

TEST_CASE("obstruction dumps: tiny residuals for cop tubes, argmax tau for twisted") {
  fs::path dir = work_dir();
  REQUIRE(run_cli("generate ellipsoid --lambda 1,1.3 --out " + (dir / "ell.json").string())
              .exit_code == 0);
  CHECK(run_cli("obstruction --spec " + (dir / "ell.json").string() + " --out " +
                (dir / "obs_ell").string())
            .exit_code == 0);
  json summary = read_json_file((dir / "obs_ell" / "obstruction_summary.json").string());
  CHECK(summary["f_tau_max_rel"].get<double>() < 1e-5);

  REQUIRE(run_cli("generate cylinder --lambda 2,3 --out " + (dir / "cyl2.json").string())
              .exit_code == 0);
  CHECK(run_cli("obstruction --spec " + (dir / "cyl2.json").string() + " --out " +
                (dir / "obs_cyl").string())
            .exit_code == 0);
  json cyl = read_json_file((dir / "obs_cyl" / "obstruction_summary.json").string());
  CHECK(cyl["f_tau_max_rel"].get<double>() < 1e-8);

  REQUIRE(run_cli("generate twisted --omega 0.5 --out " + (dir / "tw2.json").string())
              .exit_code == 0);
  CHECK(run_cli("obstruction --spec " + (dir / "tw2.json").string() + " --out " +
                (dir / "obs_tw").string())
            .exit_code == 0);
  json tw = read_json_file((dir / "obs_tw" / "obstruction_summary.json").string());
  CHECK(tw["f_tau_max_rel"].get<double>() > 1e-2);
  CHECK(tw["witness"]["magnitude"].get<double>() ==
        doctest::Approx(tw["f_tau_max_rel"].get<double>()));
  // the obstruction.csv carries one row per (z, node)
  std::string csv = slurp(dir / "obs_tw" / "obstruction.csv");
  CHECK(csv.rfind("z,node,V0,V1,S,f_tau0", 0) == 0);
}

TEST_CASE("slice: eps = 0 matches the horizontal section; tilts probe symmetry") {
  fs::path dir = work_dir();
  REQUIRE(run_cli("generate ellipsoid --lambda 1,1.3 --out " + (dir / "ell2.json").string())
              .exit_code == 0);
  CHECK(run_cli("slice --spec " + (dir / "ell2.json").string() +
                " --tau 1,0 --z0 0 --eps 0 --out " + (dir / "slice0").string())
            .exit_code == 0);
  json s0 = read_json_file((dir / "slice0" / "section.json").string());
  CHECK(s0["central"].get<bool>());
  CHECK(s0["sup_deviation"].get<double>() < 1e-9);

  CHECK(run_cli("slice --spec " + (dir / "ell2.json").string() +
                " --tau 1,0 --z0 0.1 --eps 0.05 --out " + (dir / "slice1").string())
            .exit_code == 0);
  json s1 = read_json_file((dir / "slice1" / "section.json").string());
  CHECK(s1["central"].get<bool>());

  REQUIRE(run_cli("generate twisted --omega 0.5 --out " + (dir / "tw3.json").string())
              .exit_code == 0);
  CHECK(run_cli("slice --spec " + (dir / "tw3.json").string() +
                " --tau 1,0 --z0 0 --eps 0.05 --out " + (dir / "slice_tw").string())
            .exit_code == 0);
  json stw = read_json_file((dir / "slice_tw" / "section.json").string());
  CHECK_FALSE(stw["central"].get<bool>());

  // tilt beyond the contraction guard: exit 1
  CHECK(run_cli("slice --spec " + (dir / "ell2.json").string() +
                " --tau 1,0 --z0 0 --eps 40 --out " + (dir / "slice_big").string())
            .exit_code == 1);
}

TEST_CASE("determinism: same spec, config, and seed give byte-identical reports") {
  fs::path dir = work_dir();
  REQUIRE(run_cli("generate twisted --omega 0.4 --out " + (dir / "det.json").string())
              .exit_code == 0);
  fs::path a = dir / "det_a.json", b = dir / "det_b.json", c = dir / "det_c.json";
  REQUIRE(run_cli("classify --spec " + (dir / "det.json").string() + " --seed 7 --out " +
                  a.string())
              .exit_code == 2);
  REQUIRE(run_cli("classify --spec " + (dir / "det.json").string() + " --seed 7 --out " +
                  b.string())
              .exit_code == 2);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
  // COPSCAN_THREADS caps parallelism without changing any byte of the output
  std::string cmd = std::string("COPSCAN_THREADS=1 ") + COPSCAN_CLI_PATH + " classify --spec " +
                    (dir / "det.json").string() + " --seed 7 --out " + c.string() +
                    " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 2);
  CHECK(slurp(a) == slurp(c));
}

namespace {

// Required keys per the shipped format documentation (docs/formats.md).
void check_classification_schema(const json& j) {
  for (const char* key : {"verdict", "ambient_dimension", "certificates", "detail"})
    REQUIRE(j.contains(key));
  const json& c = j["certificates"];
  for (const char* key : {"max_section_centrality_rel", "pde1_rel", "pde2_rel",
                          "obstruction_max_rel", "split_residual"})
    REQUIRE(c.contains(key));
  if (j["verdict"] == "NotCop") {
    REQUIRE(j.contains("witness"));
    for (const char* key : {"stage", "tau", "z", "u", "magnitude"})
      REQUIRE(j["witness"].contains(key));
  }
  if (j["verdict"] == "Quadric") REQUIRE(j.contains("quadric_family"));
}

}  // namespace

TEST_CASE("golden spec files classify to their pinned verdicts with stable schemas") {
  fs::path data(COPSCAN_TEST_DATA);
  fs::path dir = work_dir();
  fs::path rep = dir / "golden_cyl.json";
  CHECK(run_cli("classify --spec " + (data / "golden_cylinder.json").string() + " --out " +
                rep.string())
            .exit_code == 0);
  json cyl = read_json_file(rep.string());
  CHECK(cyl["verdict"] == "CylinderOverCentralOvaloid");
  check_classification_schema(cyl);

  fs::path rep2 = dir / "golden_tw.json";
  CHECK(run_cli("classify --spec " + (data / "golden_twisted.json").string() + " --out " +
                rep2.string())
            .exit_code == 2);
  json tw = read_json_file(rep2.string());
  CHECK(tw["verdict"] == "NotCop");
  check_classification_schema(tw);
  // spec files themselves follow the TubeSpec schema
  for (const char* name : {"golden_cylinder.json", "golden_twisted.json"}) {
    json spec = read_json_file((data / name).string());
    for (const char* key : {"dim", "L", "family", "params", "z_range"})
      REQUIRE(spec.contains(key));
  }
}

TEST_CASE("obstruction output directory carries the transverse dumps") {
  fs::path dir = work_dir();
  REQUIRE(run_cli("generate cylinder --lambda 2,3 --out " + (dir / "tcsv.json").string())
              .exit_code == 0);
  REQUIRE(run_cli("obstruction --spec " + (dir / "tcsv.json").string() + " --out " +
                  (dir / "obs_tcsv").string())
              .exit_code == 0);
  std::string csv = slurp(dir / "obs_tcsv" / "transverse.csv");
  CHECK(csv.rfind("z,node,h", 0) == 0);
  json coeffs = read_json_file((dir / "obs_tcsv" / "transverse_coefficients.json").string());
  CHECK(coeffs["z_grid"].size() == 33);
  CHECK(coeffs["coefficients"].size() == 33);
}

TEST_CASE("tube specs round-trip through JSON") {
  TubeParams p;
  p.lambda = Eigen::Vector2d(1.0, 1.4);
  p.omega = 0.3;
  TubeSpec t = generate(SphereDim(1), TubeFamily::twisted, p, 48);
  json j = to_json(t);
  TubeSpec back = tube_spec_from_json(j);
  CHECK(back.family == TubeFamily::twisted);
  CHECK(back.degree_cap == 48);
  for (double z : {-0.4, 0.2})
    CHECK((back.section(z).coeffs() - t.section(z).coeffs()).cwiseAbs().maxCoeff() < 1e-15);

  SliceAffine map;
  map.A = Eigen::MatrixXd::Identity(2, 2);
  map.A(0, 1) = 0.25;
  map.shear = Vec3(0.1, 0.0, 0.0);
  TubeSpec image = apply_affine(t, map);
  TubeSpec image_back = tube_spec_from_json(to_json(image));
  CHECK(image_back.family == TubeFamily::affine_image);
  for (double z : {-0.3, 0.5}) {
    CHECK((image_back.section(z).coeffs() - image.section(z).coeffs()).cwiseAbs().maxCoeff() <
          1e-15);
    CHECK((image_back.center(z) - image.center(z)).norm() < 1e-15);
  }
}

TEST_CASE("ellipsoid specs and centrix reports serialize with their documented keys") {
  EllipsoidSpec spec = EllipsoidSpec::axis_aligned(SphereDim(1), Eigen::Vector2d(1.0, 1.4));
  spec.center << 0.2, -0.1;
  json j = to_json(spec);
  EllipsoidSpec back = ellipsoid_spec_from_json(j);
  CHECK((back.semi_axes - spec.semi_axes).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.center - spec.center).cwiseAbs().maxCoeff() == 0.0);

  SupportField h = ellipsoid_support(spec, 32).body.h;
  QuadratureRule rule = quadrature_rule(SphereDim(1), 32);
  json rep = to_json(centrix(h, rule), rule);
  REQUIRE(rep.contains("mean_center"));
  REQUIRE(rep.contains("sup_deviation"));
  REQUIRE(rep.contains("nodes"));
  CHECK(rep["nodes"].size() == rule.size());
  CHECK(rep["nodes"][0].contains("deviation"));
}

TEST_CASE("support fields round-trip through JSON and binary dumps") {
  SupportField f(SphereDim(2), 6);
  std::mt19937_64 rng(5);
  for (int k = 0; k < f.coeffs().size(); ++k)
    f.coeffs()(k) = double(rng() % 1000) / 997.0;
  SupportField back = support_field_from_json(to_json(f));
  CHECK((back.coeffs() - f.coeffs()).cwiseAbs().maxCoeff() == 0.0);

  fs::path bin = work_dir() / "field.f64";
  save_coeffs_binary(f, bin.string());
  SupportField loaded = load_coeffs_binary(SphereDim(2), 6, bin.string());
  CHECK((loaded.coeffs() - f.coeffs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fs::file_size(bin) == sizeof(double) * std::size_t(f.coeffs().size()));

  json j = to_json(f);
  j["coeffs"].erase(j["coeffs"].size() - 1);
  CHECK_THROWS_AS(support_field_from_json(j), schema_error);
}
