#include <benchmark/benchmark.h>

#include "common.hpp"
#include "echoforge/phaseledger.hpp"

using namespace echoforge;

static void BM_AnalyticEcho(benchmark::State& state) {
  const ValidatedSequence s = bench::fig2();
  const SpectralGrid g = SpectralGrid::flat(AngularFrequency::from_mhz(2), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analytic_echo(s, g, 130e-6, SpectralMode::FirstOrder, 0.01e-6));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AnalyticEcho)->Arg(1001)->Arg(4001)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_Ledger(benchmark::State& state) {
  const ValidatedSequence s = bench::fig2();
  for (auto _ : state) benchmark::DoNotOptimize(build_ledger(s));
}
BENCHMARK(BM_Ledger);
