#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "echoforge/seqlang.hpp"

using namespace echoforge;

static std::string load(const char* name) {
  std::ifstream in(std::string(ECHOFORGE_SEQUENCE_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static void BM_Parse(benchmark::State& state) {
  const std::string text = load("fig4d.seq");
  for (auto _ : state) benchmark::DoNotOptimize(seq::parse(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Parse);

static void BM_CompileSweep(benchmark::State& state) {
  const std::string text = load("fig3_tau_over_delta.seq");
  for (auto _ : state) benchmark::DoNotOptimize(seq::compile(text));
}
BENCHMARK(BM_CompileSweep);
