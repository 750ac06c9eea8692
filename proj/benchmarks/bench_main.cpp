#include <benchmark/benchmark.h>

#include "pbftrel/generators.hpp"
#include "pbftrel/measures.hpp"
#include "pbftrel/phase_type.hpp"
#include "pbftrel/reliability.hpp"

using namespace pbftrel;

namespace {

SystemParams point(int n, int b = 1) {
  SystemParams s;
  s.n = n;
  s.theta = 0.05;
  s.mu = 0.2;
  s.gamma = 0.5;
  s.p = 0.9;
  s.beta = 0.2;
  s.lambda = 0.05;
  s.b = b;
  return s;
}

void BM_BlockMeanSparseLu(benchmark::State& state) {
  const PhaseTypeRep ph(build_block_ph(point(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(ph_mean(ph));
}
BENCHMARK(BM_BlockMeanSparseLu)->Arg(2)->Arg(5)->Arg(10)->Arg(25);

void BM_BlockMeanStructured(benchmark::State& state) {
  const PhaseTypeRep ph(build_block_ph(point(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(ph_mean_structured(ph));
}
BENCHMARK(BM_BlockMeanStructured)->Arg(2)->Arg(5)->Arg(10)->Arg(25);

void BM_BlockCdf(benchmark::State& state) {
  const PhaseTypeRep ph(build_block_ph(point(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(ph_cdf(ph, 10.0));
}
BENCHMARK(BM_BlockCdf)->Arg(2)->Arg(5)->Arg(10);

// Larger n or b leaves the stable region; those points take the saturated branch.
const SolverSettings kSaturate{1e-10, 100000, kDefaultDimensionCap, UnstablePolicy::saturate};

void BM_ThroughputExact(benchmark::State& state) {
  const SystemParams s = point(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(throughput_exact(s, kSaturate).th);
}
BENCHMARK(BM_ThroughputExact)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ThroughputRateApprox(benchmark::State& state) {
  const SystemParams s = point(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(throughput_rate_approx(s, kSaturate).th);
}
BENCHMARK(BM_ThroughputRateApprox)->Arg(1)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_StationaryPi(benchmark::State& state) {
  const SystemParams s = point(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_pi(s).pi().sum());
}
BENCHMARK(BM_StationaryPi)->Arg(2)->Arg(5)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
