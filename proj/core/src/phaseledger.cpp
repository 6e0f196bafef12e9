#include "echoforge/phaseledger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace echoforge {

namespace {

const double kSqrt2Pi = std::sqrt(kTwoPi);
constexpr double kResonanceTolerance = 1e-9;  // relative to |Δ|

// Light-shift part of φ(ω,t): −Σ_I Φ(ω) + Σ_II f(t)·Φ(ω).
double light_shift_part(const ValidatedSequence& s, double omega, double t, SpectralMode mode) {
  double phi = 0.0;
  for (std::size_t i : s.light_shift_indices()) {
    const Pulse& p = s.pulses()[i];
    const double phase = spectral_phase(p, AngularFrequency::radians_per_second(omega), mode);
    if (*s.region(i) == Region::I) {
      phi -= phase;
    } else {
      phi += delivered_fraction(p, t) * phase;
    }
  }
  return phi;
}

std::complex<double> sum_classes(const SpectralGrid& grid, const std::vector<double>& theta,
                                 double dt, double decay) {
  const auto& w = grid.detunings();
  const auto& g = grid.weights();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double phi = w[j] * dt + theta[j];
    re += g[j] * std::cos(phi);
    im += g[j] * std::sin(phi);
  }
  return {re * decay, im * decay};
}

double decay_factor(double t12, double T2) {
  return std::isinf(T2) ? 1.0 : std::exp(-2.0 * t12 / T2);
}

bool has_region_II(const ValidatedSequence& s) {
  for (std::size_t i : s.light_shift_indices())
    if (*s.region(i) == Region::II) return true;
  return false;
}

}  // namespace

SpectralGrid::SpectralGrid(std::vector<double> detunings, std::vector<double> weights)
    : detunings_(std::move(detunings)), weights_(std::move(weights)) {
  if (detunings_.empty() || detunings_.size() != weights_.size())
    throw std::invalid_argument("spectral grid needs matching, non-empty detunings and weights");
  double total = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (!std::isfinite(detunings_[j])) throw std::invalid_argument("class detuning must be finite");
    if (!(weights_[j] >= 0.0) || !std::isfinite(weights_[j]))
      throw std::invalid_argument("class weights must be non-negative");
    total += weights_[j];
  }
  if (!(total > 0.0)) throw std::invalid_argument("class weights sum to zero");
  for (double& g : weights_) g /= total;
}

SpectralGrid SpectralGrid::flat(AngularFrequency half_span, std::size_t n) {
  if (n == 0) throw std::invalid_argument("spectral grid needs at least one class");
  const double span = half_span.rad_per_s();
  if (!(span >= 0.0)) throw std::invalid_argument("spectral span must be non-negative");
  std::vector<double> w(n, 0.0);
  if (n > 1) {
    const double m = static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      const double k = 2.0 * static_cast<double>(j) - m;
      w[j] = span * k / m;
    }
  }
  return SpectralGrid(std::move(w), std::vector<double>(n, 1.0));
}

SpectralGrid SpectralGrid::default_grid() {
  return flat(AngularFrequency::from_mhz(2.0), 4001);
}

double light_shift_phase(const Pulse& p) {
  if (p.is_probe()) throw std::invalid_argument("light_shift_phase needs a light-shift pulse");
  const double delta = p.detuning().rad_per_s();
  if (delta == 0.0) throw ZeroDetuning("light-shift pulse has zero detuning");
  const double w0 = p.omega0().rad_per_s();
  return kSqrt2Pi * w0 * w0 * p.tau() / delta;
}

double spectral_phase(const Pulse& p, AngularFrequency omega, SpectralMode mode) {
  const double phi0 = light_shift_phase(p);
  const double delta = p.detuning().rad_per_s();
  const double w = omega.rad_per_s();
  switch (mode) {
    case SpectralMode::Uniform:
      return phi0;
    case SpectralMode::FirstOrder:
      return phi0 - phi0 * w / delta;
    case SpectralMode::Exact: {
      const double d = delta + w;
      if (std::abs(d) <= kResonanceTolerance * std::abs(delta))
        throw Resonance("class is resonant with the light-shift pulse (Delta + omega = 0)");
      const double w0 = p.omega0().rad_per_s();
      return kSqrt2Pi * w0 * w0 * p.tau() / d;
    }
  }
  return phi0;
}

double delivered_fraction(const Pulse& p, double t) {
  if (t >= p.support_end()) return 1.0;
  if (t <= p.support_begin()) return 0.0;
  return p.squared_envelope_integral(p.support_begin(), t) /
         p.squared_envelope_integral(p.support_begin(), p.support_end());
}

PhaseLedger build_ledger(const ValidatedSequence& s, AngularFrequency omega, SpectralMode mode) {
  PhaseLedger ledger;
  for (std::size_t i : s.light_shift_indices()) {
    const Region r = *s.region(i);
    const double phase = spectral_phase(s.pulses()[i], omega, mode);
    ledger.entries.push_back({i, r, phase});
    (r == Region::I ? ledger.phi_I : ledger.phi_II) += phase;
  }
  return ledger;
}

double accumulate_phase(const ValidatedSequence& s, AngularFrequency omega, double t,
                        SpectralMode mode) {
  if (!(t > s.t12())) throw std::invalid_argument("accumulate_phase needs t > t12");
  const double w = omega.rad_per_s();
  return w * (t - 2.0 * s.t12()) + light_shift_part(s, w, t, mode);
}

std::complex<double> echo_amplitude_spectral(const ValidatedSequence& s, const SpectralGrid& grid,
                                             double t, double T2, SpectralMode mode) {
  if (!(t > s.t12())) throw std::invalid_argument("echo amplitude needs t > t12");
  std::vector<double> theta(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    theta[j] = light_shift_part(s, grid.detunings()[j], t, mode);
  return sum_classes(grid, theta, t - 2.0 * s.t12(), decay_factor(s.t12(), T2));
}

double predict_echo_time(const ValidatedSequence& s) {
  double t = 2.0 * s.t12();
  for (std::size_t i : s.light_shift_indices()) {
    const Pulse& p = s.pulses()[i];
    const double delta = p.detuning().rad_per_s();
    if (delta == 0.0) throw ZeroDetuning("light-shift pulse has zero detuning");
    const double w0 = p.omega0().rad_per_s();
    const double shift = kSqrt2Pi * p.tau() * w0 * w0 / (delta * delta);
    t += (*s.region(i) == Region::I) ? -shift : shift;
  }
  return t;
}

std::vector<double> sample_times(const DetectionWindow& w, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("sample step must be positive");
  const auto n = static_cast<std::size_t>(std::floor((w.end - w.start) / step + 1e-9)) + 1;
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = w.start + static_cast<double>(k) * step;
  return t;
}

AnalyticEcho analytic_echo(const ValidatedSequence& s, const SpectralGrid& grid, double T2,
                           SpectralMode mode, double step) {
  AnalyticEcho out;
  out.times = sample_times(s.detection_window(), step);
  const double t12 = s.t12();
  const double decay = decay_factor(t12, T2);
  const bool time_dependent = has_region_II(s);

  std::vector<double> theta(grid.size());
  auto fill_theta = [&](double t) {
    for (std::size_t j = 0; j < grid.size(); ++j)
      theta[j] = light_shift_part(s, grid.detunings()[j], t, mode);
  };
  auto amplitude_at = [&](double t) {
    if (time_dependent) fill_theta(t);
    return sum_classes(grid, theta, t - 2.0 * t12, decay);
  };
  // Once every pulse is over, θ_j no longer depends on t.
  fill_theta(out.times.front());
  const bool settled = std::all_of(s.pulses().begin(), s.pulses().end(), [&](const Pulse& p) {
    return p.is_probe() || p.support_end() <= out.times.front();
  });
  const bool recompute = time_dependent && !settled;

  out.amplitude.reserve(out.times.size());
  for (double t : out.times)
    out.amplitude.push_back(recompute ? amplitude_at(t) : sum_classes(grid, theta, t - 2.0 * t12, decay));

  std::size_t k = 0;
  for (std::size_t i = 1; i < out.amplitude.size(); ++i)
    if (std::norm(out.amplitude[i]) > std::norm(out.amplitude[k])) k = i;

  auto intensity = [&](double t) {
    if (!recompute) return std::norm(sum_classes(grid, theta, t - 2.0 * t12, decay));
    return std::norm(amplitude_at(t));
  };
  double a = out.times[k > 0 ? k - 1 : 0];
  double b = out.times[std::min(k + 1, out.times.size() - 1)];
  double best_t = out.times[k];
  double best_i = std::norm(out.amplitude[k]);
  if (b > a) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = intensity(x1), f2 = intensity(x2);
    while (b - a > 1e-14) {
      if (f1 < f2) {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + r * (b - a); f2 = intensity(x2);
      } else {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - r * (b - a); f1 = intensity(x1);
      }
    }
    const double tm = 0.5 * (a + b);
    const double im = intensity(tm);
    if (im > best_i) {
      best_t = tm;
      best_i = im;
    }
  }
  out.peak_time = best_t;
  out.peak_intensity = best_i;
  out.peak_amplitude = recompute ? amplitude_at(best_t) : sum_classes(grid, theta, best_t - 2.0 * t12, decay);
  return out;
}

}  // namespace echoforge
