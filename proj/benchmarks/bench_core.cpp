#include <benchmark/benchmark.h>
#include "copscan/obstruction.hpp"

using namespace copscan;

static TubeSpec ellipsoid_tube(int d, int L) {
  TubeParams params;
  if (d == 1)
    params.lambda = Eigen::Vector2d(1.0, 1.3);
  else
    params.lambda = Eigen::Vector3d(1.0, 1.2, 1.4);
  return generate(SphereDim(d), TubeFamily::ellipsoid, params, L);
}

static void BM_analyze(benchmark::State& state) {
  SphereDim dim(2);
  int L = int(state.range(0));
  QuadratureRule rule = quadrature_rule(dim, L);
  SupportField f = SupportField::constant(dim, L, 1.0);
  f.coeffs()(SupportField::index_d2(2, 1)) = 0.1;
  NodeJets vals = node_jets(f, rule, JetLevel::value);
  for (auto _ : state) {
    SupportField g = analyze(dim, L, vals.values, rule);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_analyze)->Arg(16)->Arg(32)->Arg(48);

static void BM_node_jets_hessian(benchmark::State& state) {
  SphereDim dim(2);
  int L = int(state.range(0));
  QuadratureRule rule = quadrature_rule(dim, L);
  SupportField f = SupportField::constant(dim, L, 1.0);
  f.coeffs()(SupportField::index_d2(2, 1)) = 0.1;
  for (auto _ : state) {
    NodeJets jets = node_jets(f, rule, JetLevel::hessian);
    benchmark::DoNotOptimize(jets);
  }
}
BENCHMARK(BM_node_jets_hessian)->Arg(16)->Arg(32);

static void BM_transverse_support(benchmark::State& state) {
  TubeSpec tube = ellipsoid_tube(int(state.range(0)), state.range(0) == 1 ? 64 : 32);
  for (auto _ : state) {
    TransverseSupport ts = transverse_support(tube, 33);
    benchmark::DoNotOptimize(ts);
  }
}
BENCHMARK(BM_transverse_support)->Arg(1)->Arg(2);

static void BM_pde_residuals(benchmark::State& state) {
  TubeSpec tube = ellipsoid_tube(int(state.range(0)), state.range(0) == 1 ? 64 : 32);
  TransverseSupport ts = transverse_support(tube, 33);
  for (auto _ : state) {
    GridVectorField V = pde1_residual(ts);
    GridScalarField S = pde2_residual(ts);
    benchmark::DoNotOptimize(V);
    benchmark::DoNotOptimize(S);
  }
}
BENCHMARK(BM_pde_residuals)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
