#include <benchmark/benchmark.h>

#include "echoforge/transverse.hpp"

using namespace echoforge;

static void BM_EchoModulation(benchmark::State& state) {
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(echo_modulation_factor(50e-6, 110e-6, phi));
    phi += 1e-3;
  }
}
BENCHMARK(BM_EchoModulation);
