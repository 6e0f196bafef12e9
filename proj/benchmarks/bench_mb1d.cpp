#include <benchmark/benchmark.h>

#include "common.hpp"
#include "echoforge/mb1d.hpp"

using namespace echoforge;

static void BM_Propagate(benchmark::State& state) {
  const ValidatedSequence s = bench::fig2(state.range(0) != 0);
  PropagationOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(propagate(s, bench::erbium(), o));
}
BENCHMARK(BM_Propagate)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);

static void BM_AreaTheorem(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(area_theorem_check(2 * kPi, 3.5));
}
BENCHMARK(BM_AreaTheorem)->Unit(benchmark::kMillisecond)->Iterations(1);
