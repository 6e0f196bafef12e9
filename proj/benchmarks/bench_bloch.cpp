#include <benchmark/benchmark.h>

#include "common.hpp"
#include "echoforge/bloch.hpp"

using namespace echoforge;

static void BM_BlochEnsemble(benchmark::State& state) {
  const ValidatedSequence s = bench::fig2();
  const SpectralGrid g = SpectralGrid::flat(AngularFrequency::from_mhz(2), static_cast<std::size_t>(state.range(0)));
  BlochOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_sequence(s, bench::erbium(), g, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlochEnsemble)->Arg(257)->Arg(1025)->Unit(benchmark::kMillisecond);

static void BM_SingleClassTwoTone(benchmark::State& state) {
  const ValidatedSequence s = bench::fig2();
  const Pulse& ls = s.pulses()[2];
  for (auto _ : state) benchmark::DoNotOptimize(single_class_phase(ls, 0.0, LightShiftTreatment::TwoTone));
}
BENCHMARK(BM_SingleClassTwoTone)->Unit(benchmark::kMillisecond);
