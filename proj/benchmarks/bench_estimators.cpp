#include <benchmark/benchmark.h>

#include "robustlr/adversary.hpp"
#include "robustlr/estimator.hpp"
#include "robustlr/model.hpp"

using namespace robustlr;

namespace {

std::vector<MaskedSample> make_dataset(int d, int n, double eta, std::uint64_t seed) {
  RngStream rng(seed);
  const RegressionInstance inst(d, Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d))), 1.0);
  return oblivious_erasure(sample_clean(inst, n, rng), eta, rng);
}

}  // namespace

static void BM_TrimmedMean(benchmark::State& state) {
  RngStream rng(1);
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (auto& v : values) v = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(trimmed_mean(values, 0.05));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrimmedMean)->Arg(1000)->Arg(100000);

static void BM_EstimatorA2(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto data = make_dataset(d, 20000, 0.01, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimator_a2(data, 0.01));
  }
}
BENCHMARK(BM_EstimatorA2)->Arg(20)->Arg(100);

static void BM_EstimatorA1(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto data = make_dataset(d, 20000, 0.002, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimator_a1(data, 0.002));
  }
}
BENCHMARK(BM_EstimatorA1)->Arg(20)->Arg(100);

static void BM_UnifiedEstimator(benchmark::State& state) {
  const auto data = make_dataset(50, 20000, 0.002, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(unified_estimator(data, 0.002));
  }
}
BENCHMARK(BM_UnifiedEstimator);

BENCHMARK_MAIN();
