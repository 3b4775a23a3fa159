#include <benchmark/benchmark.h>

#include "robustlr/coupling.hpp"
#include "robustlr/rng.hpp"

using namespace robustlr;

static void BM_MaximalCouplingUnivariate(benchmark::State& state) {
  RngStream rng(1);
  const UnivariateGaussian p{0.0, 1.0}, q{0.5, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(maximal_coupling_univariate(p, q, rng));
  }
}
BENCHMARK(BM_MaximalCouplingUnivariate);

static void BM_SumConditionedCoupling(benchmark::State& state) {
  RngStream rng(2);
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sum_conditioned_coupling(d, 2.0, -2.0, rng));
  }
  state.SetItemsProcessed(state.iterations() * d);
}
BENCHMARK(BM_SumConditionedCoupling)->Arg(50)->Arg(400)->Arg(2000);

static void BM_HybridCouplingDense(benchmark::State& state) {
  RngStream rng(3);
  const int d = static_cast<int>(state.range(0));
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mu1 = Eigen::VectorXd::Constant(d, 0.1);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d) -
                        Eigen::MatrixXd::Constant(d, d, 0.5 / (d + 1.0));
  const HybridCoupling chain(mu0, mu1, cov);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chain.draw(rng));
  }
}
BENCHMARK(BM_HybridCouplingDense)->Arg(16)->Arg(128);

static void BM_DrawRegimePair(benchmark::State& state) {
  RngStream rng(4);
  const CouplingSpec specs[] = {SmallBetaSpec{16, 0.1, 1.0, 0.0}, BigEtaSpec{100, 1.0, 0.0},
                                IntermEtaSpec{400, 1.0, 0.05, 0.0},
                                SmallEtaSpec{100, 1.0, 0.01, 1.0}};
  const CouplingSpec& spec = specs[state.range(0)];
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw_coupled_pair(spec, rng));
  }
}
BENCHMARK(BM_DrawRegimePair)->DenseRange(0, 3)->ArgNames({"regime"});
