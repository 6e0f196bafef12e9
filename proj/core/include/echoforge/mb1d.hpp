#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "echoforge/bloch.hpp"
#include "echoforge/core.hpp"
#include "echoforge/phaseledger.hpp"

namespace echoforge {

class GridTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PropagationOptions {
  std::size_t slices = 64;
  double dt = 20e-9;
  SpectralMode spectral = SpectralMode::Exact;
  double max_slice_depth = 0.1;  // αL/N_z limit
  // Atomic classes per pass. Zero picks an odd count whose spacing keeps the
  // grid recurrence time 2π/dω at least 1.5× the simulated span.
  AngularFrequency probe_half_span = AngularFrequency::from_mhz(1.0);
  AngularFrequency ls_half_span = AngularFrequency::from_mhz(1.5);
  std::size_t probe_classes = 0;
  std::size_t ls_classes = 0;
  // Optical depth of the probe channel; zero uses Medium::alpha_L().
  double probe_alpha_L = 0.0;
  double sample_step = 0.01e-6;
  std::size_t threads = 0;
  std::size_t chunk_size = 64;
};

struct SliceRecord {
  double z = 0.0;
  double area = 0.0;        // Re ∫Ω dt
  double energy = 0.0;      // ∫|Ω|² dt
  double excitation = 0.0;  // Σ_j g_j (w_j + 1) after the pass
};

struct PassRecord {
  AngularFrequency carrier_detuning;  // 0 for the probe pass
  std::vector<SliceRecord> slices;    // ordered along that field's propagation direction
  double input_peak_rabi = 0.0;
  double output_peak_rabi = 0.0;
  // |E_in − E_out − 2κ∫Σg(w+1)dz| / E_in
  double energy_residual = 0.0;
};

struct PropagationResult {
  std::vector<double> times;                       // simulation time grid
  std::vector<std::complex<double>> output_field;  // probe channel at z = L
  PassRecord probe;
  std::vector<PassRecord> light_shift;  // one pass per distinct detuning
  EchoResult echo;                      // output field on the detection window samples
};

// Slice-sequential propagation in the retarded frame. The probe pulses and each
// light-shift carrier propagate in separate passes over the same slices; the
// light-shift field enters at z = L and acts on the probe pass through the
// Ω_LS²(z,t)·h(δ) shift only.
PropagationResult propagate(const ValidatedSequence& s, const Medium& m, const PropagationOptions& options = {});

struct AreaTheoremCheck {
  std::vector<double> z;
  std::vector<double> simulated;  // pulse area per slice
  std::vector<double> ode;        // dA/dz = −(α/2)·sin A from the simulated A(0)
  double max_relative_deviation = 0.0;
  double energy_transmission = 0.0;
  double exit_peak_ratio = 0.0;  // max|Ω| at z = L over max|Ω| at z = 0
  double energy_residual = 0.0;
};

// One resonant Gaussian pulse (τ = 3 µs, followed by a 30 µs tail) of area A0
// through a medium of optical depth alpha_L and length 1.
AreaTheoremCheck area_theorem_check(double A0, double alpha_L, const PropagationOptions& options = {});

}  // namespace echoforge
