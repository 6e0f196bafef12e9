#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "echoforge/core.hpp"

namespace echoforge {

// How the light-shift phase of a class depends on its detuning ω from the probe carrier.
//   Uniform:    Φ(ω) = Φ(0)
//   FirstOrder: Φ(ω) = Φ(0)·(1 − ω/Δ)
//   Exact:      Φ(ω) = Φ(0)·Δ/(Δ + ω)
enum class SpectralMode { Uniform, FirstOrder, Exact };

class ZeroDetuning : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Resonance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Discrete inhomogeneous line: class offsets ω_j (rad/s) with weights g_j, Σg_j = 1.
class SpectralGrid {
 public:
  // Weights are renormalized to sum to one; they must be non-negative with a positive sum.
  SpectralGrid(std::vector<double> detunings, std::vector<double> weights);

  // n equally weighted classes uniformly spaced over [-half_span, +half_span],
  // placed so that ω_j = -ω_{n-1-j} exactly.
  static SpectralGrid flat(AngularFrequency half_span, std::size_t n);
  // flat(2π·2 MHz, 4001)
  static SpectralGrid default_grid();

  std::size_t size() const { return detunings_.size(); }
  const std::vector<double>& detunings() const { return detunings_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> detunings_;
  std::vector<double> weights_;
};

// Φ_LS = √(2π)·Ω0²·τ/Δ for a light-shift pulse. Throws ZeroDetuning for Δ = 0
// and std::invalid_argument for probe pulses.
double light_shift_phase(const Pulse& p);

// Φ_LS seen by the class at offset ω.
double spectral_phase(const Pulse& p, AngularFrequency omega, SpectralMode mode);

// Fraction of a pulse's ∫Ω² delivered before time t (1 once the pulse is over).
double delivered_fraction(const Pulse& p, double t);

struct LedgerEntry {
  std::size_t pulse_index;
  Region region;
  double phase;  // Φ_LS of this pulse, signed by its detuning
};

struct PhaseLedger {
  double phi_I = 0.0;
  double phi_II = 0.0;
  std::vector<LedgerEntry> entries;

  // Light-shift part of the phase at the echo: the second probe conjugates
  // what was written in region I, region II adds directly.
  double net() const { return phi_II - phi_I; }
};

PhaseLedger build_ledger(const ValidatedSequence& s, AngularFrequency omega = {},
                         SpectralMode mode = SpectralMode::Uniform);

// φ(ω,t) = ω(t − 2t12) − Σ_I Φ(ω) + Σ_II Φ(ω), for t > t12.
// Region II pulses still in progress at t contribute their delivered fraction.
double accumulate_phase(const ValidatedSequence& s, AngularFrequency omega, double t,
                        SpectralMode mode = SpectralMode::FirstOrder);

// Σ_j g_j·exp(iφ(ω_j,t))·exp(−2t12/T2). T2 may be +infinity.
std::complex<double> echo_amplitude_spectral(const ValidatedSequence& s, const SpectralGrid& grid,
                                             double t, double T2,
                                             SpectralMode mode = SpectralMode::FirstOrder);

// 2t12 − Σ_I √(2π)τΩ0²/Δ² + Σ_II √(2π)τΩ0²/Δ².
// A region-I pulse advances the echo and a region-II pulse delays it, for either sign of Δ.
double predict_echo_time(const ValidatedSequence& s);

struct AnalyticEcho {
  std::vector<double> times;
  std::vector<std::complex<double>> amplitude;
  double peak_time = 0.0;
  double peak_intensity = 0.0;
  std::complex<double> peak_amplitude;
};

// Uniform samples start + k·step over the detection window. The peak is the
// maximum of the continuous |A(t)|², bracketed by the largest sample.
AnalyticEcho analytic_echo(const ValidatedSequence& s, const SpectralGrid& grid, double T2,
                           SpectralMode mode, double step);

// Sample times start, start+step, ... not beyond end (with a 1e-9·step slack).
std::vector<double> sample_times(const DetectionWindow& w, double step);

}  // namespace echoforge
