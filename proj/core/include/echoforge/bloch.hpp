#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "echoforge/core.hpp"
#include "echoforge/integrator.hpp"
#include "echoforge/phaseledger.hpp"

namespace echoforge {

// How a light-shift pulse acts on the ensemble.
//   EffectiveShift: class detuning δ becomes δ + Ω_LS²(t)·h(δ), with h from SpectralMode
//                   (Uniform 1/Δ, FirstOrder (1 − δ/Δ)/Δ, Exact 1/(Δ + δ)).
//   TwoTone:        the field is added to the drive as √2·Ω_LS(t)·e^{−iΔt}, whose
//                   adiabatic limit is the Ω_LS²/(Δ + δ) shift.
enum class LightShiftTreatment { EffectiveShift, TwoTone };

class StepTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPeak : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlochOptions {
  LightShiftTreatment treatment = LightShiftTreatment::EffectiveShift;
  SpectralMode spectral = SpectralMode::Exact;
  double dt_max = 20e-9;
  double rtol = 1e-10;
  double atol = 1e-12;
  double norm_tolerance = 1e-9;  // allowed |Δ(u²+v²+w²)| per step beyond T2 decay
  double sample_step = 0.01e-6;
  std::size_t threads = 0;       // 0: default_thread_count()
  std::size_t chunk_size = 128;  // classes per work item; fixes the reduction order
};

struct BlochVector {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;

  std::complex<double> coherence() const { return {u, v}; }
  double norm2() const { return u * u + v * v + w * w; }
  bool operator==(const BlochVector&) const = default;
};

struct EnsembleSnapshot {
  double time = 0.0;
  std::size_t after_pulse = 0;  // index into Sequence::pulses
  std::vector<BlochVector> classes;
};

struct BlochTrajectory {
  std::vector<EnsembleSnapshot> snapshots;  // one per pulse, taken when its support ends
  std::vector<double> times;                // sample times
  std::vector<std::complex<double>> polarization;  // Σ_j g_j (u_j + i v_j) at each sample
  std::vector<BlochVector> final_state;
  double max_norm_error = 0.0;  // max_j |u²+v²+w² − 1| seen at samples (T2 = ∞ only)
  std::size_t accepted_steps = 0;
};

struct EchoResult {
  std::vector<double> times;
  std::vector<std::complex<double>> field;
  double peak_time = 0.0;
  double peak_intensity = 0.0;
  std::complex<double> peak_field;
  double ratio_to_reference = 1.0;
};

// Light-shift frequency function h(δ) used by EffectiveShift for pulse p.
// Exact mode keeps |Δ + δ| ≥ p.omega0() so the resonant class stays finite.
double shift_coefficient(const Pulse& p, double delta_class, SpectralMode mode);

// Integrates every class from the ground state through the sequence.
// Samples are taken on the detection window with options.sample_step.
BlochTrajectory integrate_sequence(const ValidatedSequence& s, const Medium& m, const SpectralGrid& grid,
                                   const BlochOptions& options = {});

// Peak of |P(t)|² over the window samples, refined by a parabola through the
// largest sample and its neighbours. Throws NoPeak below 1e-12.
EchoResult detect_echo(const BlochTrajectory& trajectory, const DetectionWindow& window);

// Same peak search on an arbitrary sampled field.
EchoResult detect_peak(std::vector<double> times, std::vector<std::complex<double>> field);

// Sets ratio_to_reference = peak_intensity / reference.peak_intensity.
void normalize_to(EchoResult& result, const EchoResult& reference);

// Phase written by one light-shift pulse on a single class that starts with
// coherence 1 (u=1, v=0, w=0): unwrapped arg of c(t)·e^{−iδt} across the pulse
// support, T2 = ∞.
double single_class_phase(const Pulse& ls, double delta_class, LightShiftTreatment treatment,
                          const BlochOptions& options = {});

}  // namespace echoforge
