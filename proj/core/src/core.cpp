#include "echoforge/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace echoforge {

namespace {

constexpr double kProbeTimingTolerance = 1e-12;  // s

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

std::string us(double seconds) {
  std::ostringstream os;
  os << seconds / kMicrosecond << " us";
  return os.str();
}

}  // namespace

Pulse::Pulse(PulseKind kind, double t0, double tau, AngularFrequency omega0,
             AngularFrequency detuning, double waist)
    : kind_(kind), t0_(t0), tau_(tau), omega0_(omega0), detuning_(detuning), waist_(waist) {
  require(std::isfinite(t0), "pulse center time must be finite");
  require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  require(std::isfinite(omega0.rad_per_s()) && omega0.rad_per_s() >= 0.0,
          "Rabi frequency must be non-negative");
  require(std::isfinite(detuning.rad_per_s()), "detuning must be finite");
  require(std::isfinite(waist) && waist > 0.0, "waist must be positive");
  require(kind != PulseKind::Probe || detuning.rad_per_s() == 0.0,
          "probe pulses are resonant (zero detuning)");
}

Pulse Pulse::probe(double t0, double tau, AngularFrequency omega0, double waist) {
  return Pulse(PulseKind::Probe, t0, tau, omega0, AngularFrequency{}, waist);
}

Pulse Pulse::light_shift(double t0, double tau, AngularFrequency omega0,
                         AngularFrequency detuning, double waist) {
  return Pulse(PulseKind::LightShift, t0, tau, omega0, detuning, waist);
}

double Pulse::envelope(double t) const {
  const double x = t - t0_;
  if (std::abs(x) > kSupportWidths * tau_) return 0.0;
  return std::exp(-x * x / (4.0 * tau_ * tau_));
}

double Pulse::rabi_untruncated(double t) const {
  const double x = t - t0_;
  return omega0_.rad_per_s() * std::exp(-x * x / (4.0 * tau_ * tau_));
}

double Pulse::squared_envelope_integral(double a, double b) const {
  a = std::max(a, support_begin());
  b = std::min(b, support_end());
  if (b <= a) return 0.0;
  const double s = std::sqrt(2.0) * tau_;
  return tau_ * std::sqrt(kPi / 2.0) * (std::erf((b - t0_) / s) - std::erf((a - t0_) / s));
}

Pulse Pulse::with_t0(double t0) const {
  return Pulse(kind_, t0, tau_, omega0_, detuning_, waist_);
}
Pulse Pulse::with_tau(double tau) const {
  return Pulse(kind_, t0_, tau, omega0_, detuning_, waist_);
}
Pulse Pulse::with_omega0(AngularFrequency omega0) const {
  return Pulse(kind_, t0_, tau_, omega0, detuning_, waist_);
}
Pulse Pulse::with_detuning(AngularFrequency detuning) const {
  return Pulse(kind_, t0_, tau_, omega0_, detuning, waist_);
}
Pulse Pulse::with_waist(double waist) const {
  return Pulse(kind_, t0_, tau_, omega0_, detuning_, waist);
}

double pulse_area(const Pulse& p) {
  return 2.0 * std::sqrt(kPi) * p.omega0().rad_per_s() * p.tau();
}

std::vector<std::size_t> ValidatedSequence::light_shift_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < raw_.pulses.size(); ++i)
    if (!raw_.pulses[i].is_probe()) out.push_back(i);
  return out;
}

std::vector<std::size_t> ValidatedSequence::probe_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < raw_.pulses.size(); ++i)
    if (raw_.pulses[i].is_probe()) out.push_back(i);
  return out;
}

ValidatedSequence ValidatedSequence::without_light_shift() const {
  Sequence s = raw_;
  std::erase_if(s.pulses, [](const Pulse& p) { return !p.is_probe(); });
  return validate_sequence(s);
}

ValidatedSequence validate_sequence(const Sequence& s) {
  using Code = SequenceError::Code;
  const double t12 = s.t12;
  if (!std::isfinite(t12) || t12 <= 0.0)
    throw SequenceError(Code::NegativeTiming, std::nullopt, "t12 must be positive");

  std::vector<std::size_t> probes;
  for (std::size_t i = 0; i < s.pulses.size(); ++i)
    if (s.pulses[i].is_probe()) probes.push_back(i);
  if (probes.size() < 2)
    throw SequenceError(Code::MissingProbe, probes.empty() ? std::nullopt : std::optional(probes[0]),
                        "a two-pulse echo needs exactly two probe pulses, found " +
                            std::to_string(probes.size()));
  if (probes.size() > 2)
    throw SequenceError(Code::MisplacedProbe, probes[2],
                        "a two-pulse echo needs exactly two probe pulses, found " +
                            std::to_string(probes.size()));

  bool at_zero = false, at_t12 = false;
  for (std::size_t i : probes) {
    const double t0 = s.pulses[i].t0();
    if (t0 < -kProbeTimingTolerance)
      throw SequenceError(Code::NegativeTiming, i, "probe pulse at negative time " + us(t0));
    if (std::abs(t0) <= kProbeTimingTolerance && !at_zero) {
      at_zero = true;
    } else if (std::abs(t0 - t12) <= kProbeTimingTolerance && !at_t12) {
      at_t12 = true;
    } else {
      throw SequenceError(Code::MisplacedProbe, i,
                          "probe pulses must sit at t=0 and t=t12=" + us(t12) + ", found one at " + us(t0));
    }
  }

  const auto& w = s.detection_window;
  if (!(std::isfinite(w.start) && std::isfinite(w.end)) || w.start < 0.0)
    throw SequenceError(Code::NegativeTiming, std::nullopt, "detection window must start at t >= 0");
  if (!(w.start < w.end) || w.start > 2.0 * t12 || w.end < 2.0 * t12)
    throw SequenceError(Code::BadDetectionWindow, std::nullopt,
                        "detection window must contain the echo time 2*t12=" + us(2.0 * t12));

  ValidatedSequence v;
  v.raw_ = s;
  v.regions_.assign(s.pulses.size(), std::nullopt);
  for (std::size_t i = 0; i < s.pulses.size(); ++i) {
    const Pulse& p = s.pulses[i];
    if (p.is_probe()) continue;
    if (p.t0() < 0.0)
      throw SequenceError(Code::NegativeTiming, i, "light-shift pulse at negative time " + us(p.t0()));
    const double a = p.support_begin();
    const double b = p.support_end();
    if (a > 0.0 && b < t12) {
      v.regions_[i] = Region::I;
    } else if (a > t12 && b < 2.0 * t12) {
      v.regions_[i] = Region::II;
    } else {
      throw SequenceError(Code::StraddlingPulse, i,
                          "light-shift pulse [" + us(a) + ", " + us(b) +
                              "] (t0 +/- 4 tau) must lie inside (0, t12) or (t12, 2*t12)");
    }
  }
  return v;
}

ValidatedSequence validate_sequence(const ValidatedSequence& s) { return s; }

Medium::Medium(double alpha_L, double T2, AngularFrequency inhom_hwhm, double length)
    : alpha_L_(alpha_L), T2_(T2), inhom_hwhm_(inhom_hwhm), length_(length) {
  require(std::isfinite(alpha_L) && alpha_L > 0.0, "optical depth must be positive");
  require(!std::isnan(T2) && T2 > 0.0, "T2 must be positive");
  require(inhom_hwhm.rad_per_s() > 0.0, "inhomogeneous width must be positive");
  require(std::isfinite(length) && length > 0.0, "medium length must be positive");
}

bool Medium::broadband_for(const Pulse& probe) const {
  const double field_sigma_t = std::sqrt(2.0) * probe.tau();
  const double spectral_rms = 1.0 / field_sigma_t;
  return inhom_hwhm_.rad_per_s() >= 10.0 * spectral_rms;
}

}  // namespace echoforge
