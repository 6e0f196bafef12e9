#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "echoforge/units.hpp"

namespace echoforge {

// Gaussian envelopes are evaluated on [t0 - kSupportWidths*tau, t0 + kSupportWidths*tau]
// and are exactly zero outside.
inline constexpr double kSupportWidths = 4.0;

enum class PulseKind { Probe, LightShift };

/// One Gaussian optical pulse.
///
/// `tau` is the rms duration of the intensity profile:
///   Ω(t)  = Ω0 · exp(-(t - t0)² / (4τ²))
///   Ω²(t) = Ω0² · exp(-(t - t0)² / (2τ²))
/// so that ∫Ω²dt = √(2π)·Ω0²·τ and ∫Ω dt = 2√π·Ω0·τ.
class Pulse {
 public:
  static Pulse probe(double t0, double tau, AngularFrequency omega0, double waist);
  static Pulse light_shift(double t0, double tau, AngularFrequency omega0,
                           AngularFrequency detuning, double waist);

  PulseKind kind() const { return kind_; }
  bool is_probe() const { return kind_ == PulseKind::Probe; }
  double t0() const { return t0_; }
  double tau() const { return tau_; }
  AngularFrequency omega0() const { return omega0_; }
  AngularFrequency detuning() const { return detuning_; }
  double waist() const { return waist_; }

  double support_begin() const { return t0_ - kSupportWidths * tau_; }
  double support_end() const { return t0_ + kSupportWidths * tau_; }

  // Normalized field envelope (1 at t0), truncated to the support.
  double envelope(double t) const;
  // Ω(t) in rad/s.
  double rabi(double t) const { return omega0_.rad_per_s() * envelope(t); }
  // Ω(t) without truncation, for integrators that already split time at the support edges.
  double rabi_untruncated(double t) const;
  // ∫_a^b envelope² dt restricted to the support (closed form via erf).
  double squared_envelope_integral(double a, double b) const;

  Pulse with_t0(double t0) const;
  Pulse with_tau(double tau) const;
  Pulse with_omega0(AngularFrequency omega0) const;
  Pulse with_detuning(AngularFrequency detuning) const;
  Pulse with_waist(double waist) const;

  bool operator==(const Pulse&) const = default;

 private:
  Pulse(PulseKind kind, double t0, double tau, AngularFrequency omega0,
        AngularFrequency detuning, double waist);

  PulseKind kind_;
  double t0_;
  double tau_;
  AngularFrequency omega0_;
  AngularFrequency detuning_;
  double waist_;
};

// ∫Ω(t)dt over the untruncated envelope: 2√π·Ω0·τ.
double pulse_area(const Pulse& p);

struct DetectionWindow {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const DetectionWindow&) const = default;
};

/// Raw pulse schedule as written by a user, before validation.
struct Sequence {
  std::vector<Pulse> pulses;
  double t12 = 0.0;
  DetectionWindow detection_window;
  bool operator==(const Sequence&) const = default;
};

enum class Region { I, II };

class SequenceError : public std::runtime_error {
 public:
  enum class Code {
    MissingProbe,
    MisplacedProbe,
    NegativeTiming,
    StraddlingPulse,
    BadDetectionWindow,
  };

  SequenceError(Code code, std::optional<std::size_t> pulse_index, const std::string& what)
      : std::runtime_error(what), code_(code), pulse_index_(pulse_index) {}

  Code code() const { return code_; }
  // Index into Sequence::pulses of the offending pulse, when there is one.
  std::optional<std::size_t> pulse_index() const { return pulse_index_; }

 private:
  Code code_;
  std::optional<std::size_t> pulse_index_;
};

/// A schedule that passed validate_sequence(), with each light-shift pulse
/// assigned to region I (0, t12) or region II (t12, 2·t12).
class ValidatedSequence {
 public:
  const Sequence& raw() const { return raw_; }
  const std::vector<Pulse>& pulses() const { return raw_.pulses; }
  double t12() const { return raw_.t12; }
  const DetectionWindow& detection_window() const { return raw_.detection_window; }

  // Region of pulse i; empty for probes.
  std::optional<Region> region(std::size_t i) const { return regions_.at(i); }

  std::vector<std::size_t> light_shift_indices() const;
  std::vector<std::size_t> probe_indices() const;

  // Same probes and detection window, all light-shift pulses removed.
  ValidatedSequence without_light_shift() const;

  bool operator==(const ValidatedSequence&) const = default;

 private:
  friend ValidatedSequence validate_sequence(const Sequence& s);
  ValidatedSequence() = default;

  Sequence raw_;
  std::vector<std::optional<Region>> regions_;
};

ValidatedSequence validate_sequence(const Sequence& s);
ValidatedSequence validate_sequence(const ValidatedSequence& s);

/// Two-level ensemble parameters.
class Medium {
 public:
  // T2 may be +infinity (no homogeneous decay).
  Medium(double alpha_L, double T2, AngularFrequency inhom_hwhm, double length);

  double alpha_L() const { return alpha_L_; }
  double T2() const { return T2_; }
  AngularFrequency inhom_hwhm() const { return inhom_hwhm_; }
  double length() const { return length_; }

  // True when the inhomogeneous half-width exceeds ten times the spectral rms
  // width of the probe field envelope, i.e. the line is flat over what the
  // probe excites.
  bool broadband_for(const Pulse& probe) const;

  bool operator==(const Medium&) const = default;

 private:
  double alpha_L_;
  double T2_;
  AngularFrequency inhom_hwhm_;
  double length_;
};

}  // namespace echoforge
