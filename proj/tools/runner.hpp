#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "echoforge/seqlang.hpp"

namespace echoforge::cli {

enum class Tier { Analytic, Bloch, Mb1d };

const char* tier_name(Tier t);

struct RunConfig {
  Tier tier = Tier::Analytic;
  bool transverse = false;
  std::size_t jobs = 0;  // 0: ECHOFORGE_THREADS or hardware concurrency
  double tol = 1e-10;
};

struct JobOutcome {
  bool ok = false;
  std::string message;
  double peak_time = 0.0;       // s
  double peak_intensity = 0.0;  // relative to the bare echo peak
  double ratio = 0.0;           // including η when transverse is on
  double eta = 1.0;
  double phi_I = 0.0;
  double phi_II = 0.0;
  double predicted_echo_time = 0.0;  // s
  std::vector<double> times;         // s
  std::vector<double> intensity;     // relative to the bare echo peak
};

class ReferenceCache;

// Runs one validated job through the selected tier and normalizes it against
// the cached no-light-shift run of the same probes.
JobOutcome run_job(const seq::Experiment& ex, const ValidatedSequence& s, const RunConfig& cfg,
                   std::size_t inner_threads, ReferenceCache& cache);

std::uint64_t fnv1a(std::string_view bytes);

// Entry point of the `echoforge` executable; returns the process exit code.
//   0 success, 1 usage / unreadable file / diagnostics, 2 numerical failure.
int main(int argc, const char* const* argv);

}  // namespace echoforge::cli
