#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "copscan/support_field.hpp"
#include "testutil.hpp"

using namespace copscan;
using testutil::oracle_basis;
using testutil::oracle_synthesize;
using testutil::random_field;

TEST_CASE("quadrature integrates constants exactly") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    QuadratureRule rule = quadrature_rule(dim, 16);
    double total = 0;
    for (double w : rule.weights) total += w;
    CHECK(total == doctest::Approx(dim.sphere_area()).epsilon(1e-13));
  }
}

TEST_CASE("quadrature: (u.e3)^2 over S^2 equals 4pi/3") {
  QuadratureRule rule = quadrature_rule(SphereDim(2), 8);
  double acc = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    acc += rule.weights[i] * rule.nodes[i].z() * rule.nodes[i].z();
  CHECK(acc == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("quadrature matches closed-form monomial integrals up to degree 2L") {
  SUBCASE("d=2") {
    int L = 6;
    QuadratureRule rule = quadrature_rule(SphereDim(2), L);
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 6; ++b)
        for (int c = 0; a + b + c <= 2 * L; c += 3) {
          double acc = 0;
          for (std::size_t i = 0; i < rule.size(); ++i) {
            const Vec3& u = rule.nodes[i];
            acc += rule.weights[i] * std::pow(u.x(), a) * std::pow(u.y(), b) *
                   std::pow(u.z(), c);
          }
          CHECK(std::abs(acc - testutil::monomial_integral_s2(a, b, c)) < 1e-10);
        }
  }
  SUBCASE("d=1") {
    int L = 6;
    QuadratureRule rule = quadrature_rule(SphereDim(1), L);
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; a + b <= 2 * L; ++b) {
        double acc = 0;
        for (std::size_t i = 0; i < rule.size(); ++i)
          acc += rule.weights[i] * std::pow(rule.nodes[i].x(), a) *
                 std::pow(rule.nodes[i].y(), b);
        CHECK(std::abs(acc - testutil::monomial_integral_s1(a, b)) < 1e-10);
      }
  }
}

TEST_CASE("synthesize: constant and single-mode examples") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    SupportField c3 = SupportField::constant(dim, 8, 3.0);
    CHECK(synthesize(c3, Vec3(0, 0.6, d == 1 ? 0.0 : 0.8).normalized()) ==
          doctest::Approx(3.0).epsilon(1e-14));
  }
  SupportField f(SphereDim(1), 4);
  f.coeffs()(SupportField::index_d1(1, true)) = 1.0;  // sin(theta)
  CHECK(synthesize(f, Vec3(0, 1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("synthesize agrees with the naive basis-sum oracle") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    int L = d == 1 ? 16 : 10;
    SupportField f = random_field(dim, L, 42 + d);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
      Vec3 u = testutil::random_unit(dim, rng);
      CHECK(std::abs(synthesize(f, u) - oracle_synthesize(f, u)) < 1e-12);
    }
  }
}

TEST_CASE("synthesize rejects non-unit directions") {
  SupportField f = SupportField::constant(SphereDim(2), 4, 1.0);
  CHECK_THROWS_AS(synthesize(f, Vec3(1.0, 0.5, 0.0)), std::domain_error);
}

TEST_CASE("analyze: constant samples produce only the degree-0 coefficient") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    int L = 8;
    QuadratureRule rule = quadrature_rule(dim, L);
    std::vector<double> ones(rule.size(), 1.0);
    SupportField f = analyze(dim, L, ones, rule);
    CHECK(synthesize(f, rule.nodes[3]) == doctest::Approx(1.0).epsilon(1e-13));
    for (int k = 1; k < f.coeffs().size(); ++k) CHECK(std::abs(f.coeffs()(k)) < 1e-13);
  }
}

TEST_CASE("analyze(synthesize(.)) is the identity on band-limited fields") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    int L = d == 1 ? 24 : 12;
    SupportField f = random_field(dim, L, 99 + d);
    QuadratureRule rule = quadrature_rule(dim, L);
    NodeJets vals = node_jets(f, rule, JetLevel::value);
    SupportField g = analyze(dim, L, vals.values, rule);
    CHECK((g.coeffs() - f.coeffs()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("analyze rejects sample-count mismatches") {
  std::vector<double> samples(10, 1.0);
  CHECK_THROWS_AS(analyze(SphereDim(1), 8, samples), std::invalid_argument);
}

TEST_CASE("analyze: degree-(L+1) input projects to zero at degrees <= L") {
  SUBCASE("d=1") {
    int L = 8;
    SphereDim dim(1);
    QuadratureRule rule = quadrature_rule(dim, L);
    std::vector<double> samples(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double th = std::atan2(rule.nodes[i].y(), rule.nodes[i].x());
      samples[i] = std::cos((L + 1) * th);
    }
    SupportField f = analyze(dim, L, samples, rule);
    CHECK(f.coeffs().cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("d=2") {
    int L = 8;
    SphereDim dim(2);
    QuadratureRule rule = quadrature_rule(dim, L);
    for (int m : {0, 3, L + 1}) {
      std::vector<double> samples(rule.size());
      for (std::size_t i = 0; i < rule.size(); ++i)
        samples[i] = testutil::oracle_basis_d2(L + 1, m, rule.nodes[i]);
      SupportField f = analyze(dim, L, samples, rule);
      CHECK(f.coeffs().cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("analyze: aliasing of degree-(L+2) input matches the coarse-rule integral") {
  // Sampled two degrees above the cap, cos((L+2)theta) folds onto mode L on
  // the 2L+2 point grid; a high-resolution rule shows the true projection is
  // zero.
  int L = 8;
  SphereDim dim(1);
  QuadratureRule rule = quadrature_rule(dim, L);
  std::vector<double> samples(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double th = std::atan2(rule.nodes[i].y(), rule.nodes[i].x());
    samples[i] = std::cos((L + 2) * th);
  }
  SupportField f = analyze(dim, L, samples, rule);
  double aliased = f.coeffs()(SupportField::index_d1(L, false));
  // coarse-rule oracle integral of cos((L+2)t) cos(L t) / pi
  double coarse = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double th = std::atan2(rule.nodes[i].y(), rule.nodes[i].x());
    coarse += rule.weights[i] * std::cos((L + 2) * th) * std::cos(L * th) / M_PI;
  }
  CHECK(aliased == doctest::Approx(coarse).epsilon(1e-12));
  CHECK(std::abs(aliased - 1.0) < 1e-12);  // exact fold on the uniform grid
  QuadratureRule fine = quadrature_rule(dim, 4 * L);
  double truth = 0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    double th = std::atan2(fine.nodes[i].y(), fine.nodes[i].x());
    truth += fine.weights[i] * std::cos((L + 2) * th) * std::cos(L * th) / M_PI;
  }
  CHECK(std::abs(truth) < 1e-12);
}

TEST_CASE("laplace_beltrami is diagonal with the right eigenvalues") {
  SUBCASE("circle mode cos 3theta -> -9 cos 3theta") {
    SupportField f(SphereDim(1), 6);
    f.coeffs()(SupportField::index_d1(3, false)) = 1.0;
    SupportField g = laplace_beltrami(f);
    CHECK(g.coeffs()(SupportField::index_d1(3, false)) == doctest::Approx(-9.0));
    CHECK((g.coeffs() + 9.0 * f.coeffs()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("degree-2 spherical harmonic -> -6 Y2") {
    SupportField f(SphereDim(2), 6);
    f.coeffs()(SupportField::index_d2(2, -1)) = 0.7;
    SupportField g = laplace_beltrami(f);
    CHECK(g.coeffs()(SupportField::index_d2(2, -1)) == doctest::Approx(-4.2));
  }
  SUBCASE("constants map to zero") {
    for (int d : {1, 2}) {
      SupportField f = SupportField::constant(SphereDim(d), 5, 2.5);
      CHECK(laplace_beltrami(f).coeffs().cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("every basis element is scaled exactly by its eigenvalue") {
    for (int d : {1, 2}) {
      SphereDim dim(d);
      int L = 5;
      for (int k = 0; k < SupportField::coeff_count(dim, L); ++k) {
        SupportField f(dim, L);
        f.coeffs()(k) = 1.0;
        int deg = f.degree_of_index(k);
        double eig = d == 1 ? -double(deg) * deg : -double(deg) * (deg + 1);
        SupportField g = laplace_beltrami(f);
        CHECK(g.coeffs()(k) == doctest::Approx(eig).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("surface_gradient: constants, linear fields, FD oracle, tangency") {
  SUBCASE("constant -> zero") {
    for (int d : {1, 2}) {
      SupportField f = SupportField::constant(SphereDim(d), 6, 4.0);
      std::mt19937_64 rng(3);
      Vec3 u = testutil::random_unit(f.dim(), rng);
      CHECK(surface_gradient(f, u).norm() < 1e-14);
    }
  }
  SUBCASE("f(u) = u.e1 at u = e2 gives e1") {
    SupportField f = SupportField::linear(SphereDim(2), 4, Vec3::UnitX());
    Vec3 g = surface_gradient(f, Vec3::UnitY());
    CHECK((g - Vec3::UnitX()).norm() < 1e-13);
  }
  SUBCASE("random fields match geodesic finite differences") {
    for (int d : {1, 2}) {
      SphereDim dim(d);
      SupportField f = random_field(dim, d == 1 ? 24 : 16, 1234 + d);
      std::mt19937_64 rng(5);
      for (int trial = 0; trial < 20; ++trial) {
        Vec3 u = testutil::random_unit(dim, rng);
        Vec3 X = testutil::random_tangent(dim, u, rng);
        double fd = testutil::geodesic_derivative(f, u, X, 1e-5);
        CHECK(std::abs(surface_gradient(f, u).dot(X) - fd) < 1e-7);
      }
    }
  }
  SUBCASE("gradient is orthogonal to u at every node") {
    for (int d : {1, 2}) {
      SphereDim dim(d);
      SupportField f = random_field(dim, 10, 77 + d);
      QuadratureRule rule = quadrature_rule(dim, 10);
      NodeJets jets = node_jets(f, rule, JetLevel::gradient);
      for (std::size_t i = 0; i < rule.size(); ++i)
        CHECK(std::abs(jets.gradients[i].dot(rule.nodes[i])) < 1e-10);
    }
  }
}

TEST_CASE("hessian_apply: second-derivative examples and the geodesic oracle") {
  SUBCASE("d=1: cos(2theta) at theta=0 gives -4 X") {
    SupportField f(SphereDim(1), 4);
    f.coeffs()(SupportField::index_d1(2, false)) = 1.0;
    Vec3 u(1, 0, 0), X(0, 1, 0);  // tangent at theta = 0
    Vec3 HX = hessian_apply(f, u, X);
    CHECK((HX + 4.0 * X).norm() < 1e-13);
  }
  SUBCASE("constants give zero") {
    SupportField f = SupportField::constant(SphereDim(2), 4, 9.0);
    Vec3 u = Vec3::UnitZ();
    CHECK(hessian_apply(f, u, Vec3::UnitX()).norm() < 1e-14);
  }
  SUBCASE("non-tangent input is a domain error") {
    SupportField f = SupportField::constant(SphereDim(2), 4, 1.0);
    CHECK_THROWS_AS(hessian_apply(f, Vec3::UnitZ(), Vec3::UnitZ()), std::domain_error);
  }
  SUBCASE("random fields: symmetry and the parallel-transport FD oracle") {
    for (int d : {1, 2}) {
      SphereDim dim(d);
      SupportField f = random_field(dim, 12, 4321 + d);
      std::mt19937_64 rng(11);
      for (int trial = 0; trial < 12; ++trial) {
        Vec3 u = testutil::random_unit(dim, rng);
        Vec3 e1, e2;
        tangent_basis(dim, u, e1, e2);
        Vec3 He1 = hessian_apply(f, u, e1);
        double h11 = testutil::geodesic_second(f, u, e1, 1e-4);
        CHECK(std::abs(e1.dot(He1) - h11) < 1e-6);
        if (d == 2) {
          Vec3 He2 = hessian_apply(f, u, e2);
          CHECK(std::abs(e2.dot(He1) - e1.dot(He2)) < 1e-8);  // symmetric bilinear
          double h22 = testutil::geodesic_second(f, u, e2, 1e-4);
          CHECK(std::abs(e2.dot(He2) - h22) < 1e-6);
          // cross term via polarization along (e1+e2)/sqrt(2)
          Vec3 diag = (e1 + e2).normalized();
          double hdd = testutil::geodesic_second(f, u, diag, 1e-4);
          CHECK(std::abs(0.5 * (h11 + h22) + e2.dot(He1) - hdd) < 1e-6);
        }
      }
    }
  }
  SUBCASE("trace of the covariant Hessian equals the Laplacian") {
    SphereDim dim(2);
    SupportField f = random_field(dim, 10, 55);
    SupportField lap = laplace_beltrami(f);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 8; ++trial) {
      Vec3 u = testutil::random_unit(dim, rng);
      Vec3 e1, e2;
      tangent_basis(dim, u, e1, e2);
      double tr = e1.dot(hessian_apply(f, u, e1)) + e2.dot(hessian_apply(f, u, e2));
      CHECK(std::abs(tr - synthesize(lap, u)) < 1e-9);
    }
  }
}

TEST_CASE("Green identity: int f Lap g = int g Lap f under the rule") {
  for (int d : {1, 2}) {
    SphereDim dim(d);
    int L = 10;
    SupportField f = random_field(dim, L, 2024);
    SupportField g = random_field(dim, L, 2025);
    QuadratureRule rule = quadrature_rule(dim, L);
    NodeJets fv = node_jets(f, rule, JetLevel::value);
    NodeJets gv = node_jets(g, rule, JetLevel::value);
    NodeJets lf = node_jets(laplace_beltrami(f), rule, JetLevel::value);
    NodeJets lg = node_jets(laplace_beltrami(g), rule, JetLevel::value);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      lhs += rule.weights[i] * fv.values[i] * lg.values[i];
      rhs += rule.weights[i] * gv.values[i] * lf.values[i];
    }
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("basis values match the std::assoc_legendre oracle") {
  SphereDim dim(2);
  int L = 12;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Vec3 u = testutil::random_unit(dim, rng);
    SupportField f(dim, L);
    int k = int(rng() % unsigned(SupportField::coeff_count(dim, L)));
    f.coeffs()(k) = 1.0;
    CHECK(std::abs(synthesize(f, u) - oracle_basis(dim, k, u)) < 1e-12);
  }
}
