#include "echoforge/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "echoforge/parallel.hpp"

namespace echoforge {

namespace {

using State = std::array<double, 3>;

enum class IntervalKind { Free, Shift, Driven };

struct Interval {
  double a = 0.0;
  double b = 0.0;
  IntervalKind kind = IntervalKind::Free;
  std::vector<std::size_t> probes;     // active probe pulses
  std::vector<std::size_t> shifts;     // active light-shift pulses treated as a detuning shift
  std::vector<std::size_t> two_tones;  // active light-shift pulses treated as a drive
  long sample = -1;                    // sample index taken at b
  std::vector<std::size_t> snapshots;  // pulses whose snapshot is taken at b
};

struct Timeline {
  std::vector<Interval> intervals;
  std::vector<double> samples;
};

bool overlaps(const Pulse& p, double a, double b) {
  return p.support_begin() < b && p.support_end() > a;
}

Timeline build_timeline(const ValidatedSequence& s, const BlochOptions& opt) {
  Timeline tl;
  tl.samples = sample_times(s.detection_window(), opt.sample_step);
  const auto& pulses = s.pulses();

  std::vector<double> points(tl.samples);
  double start = tl.samples.front();
  for (const Pulse& p : pulses) {
    points.push_back(p.support_begin());
    points.push_back(p.support_end());
    start = std::min(start, p.support_begin());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  points.erase(points.begin(), std::lower_bound(points.begin(), points.end(), start));

  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    Interval iv;
    iv.a = points[k];
    iv.b = points[k + 1];
    for (std::size_t i = 0; i < pulses.size(); ++i) {
      if (!overlaps(pulses[i], iv.a, iv.b)) continue;
      if (pulses[i].is_probe()) {
        iv.probes.push_back(i);
      } else if (opt.treatment == LightShiftTreatment::TwoTone) {
        iv.two_tones.push_back(i);
      } else {
        iv.shifts.push_back(i);
      }
    }
    if (!iv.probes.empty() || !iv.two_tones.empty()) {
      iv.kind = IntervalKind::Driven;
    } else if (!iv.shifts.empty()) {
      iv.kind = IntervalKind::Shift;
    }
    tl.intervals.push_back(std::move(iv));
  }

  // The first point is the earliest pulse edge or the first sample; a sample can
  // only coincide with it when no pulse precedes the window.
  for (std::size_t k = 0; k < tl.samples.size(); ++k) {
    const double t = tl.samples[k];
    if (t == points.front()) throw std::invalid_argument("detection window starts before every pulse");
    auto it = std::lower_bound(points.begin(), points.end(), t);
    tl.intervals[static_cast<std::size_t>(it - points.begin()) - 1].sample = static_cast<long>(k);
  }
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    auto it = std::lower_bound(points.begin(), points.end(), pulses[i].support_end());
    tl.intervals[static_cast<std::size_t>(it - points.begin()) - 1].snapshots.push_back(i);
  }
  return tl;
}

double clamp_away_from_zero(double d, double guard, double sign_hint) {
  if (std::abs(d) >= guard) return d;
  const double sign = d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : (sign_hint >= 0.0 ? 1.0 : -1.0);
  return sign * guard;
}

// Right-hand side of the optical Bloch equations for one class. Intervals never
// cross a support edge, so the active pulses are evaluated without truncation.
struct ClassDynamics {
  const std::vector<Pulse>* pulses;
  const Interval* iv;
  const std::vector<double>* h;  // shift coefficient per pulse index for this class
  double delta;
  double gamma;  // 1/T2

  void operator()(double t, const State& y, State& dy) const {
    double d = delta;
    for (std::size_t i : iv->shifts) {
      const double r = (*pulses)[i].rabi_untruncated(t);
      d += r * r * (*h)[i];
    }
    double om_r = 0.0;
    double om_i = 0.0;
    for (std::size_t i : iv->probes) om_r += (*pulses)[i].rabi_untruncated(t);
    for (std::size_t i : iv->two_tones) {
      const Pulse& p = (*pulses)[i];
      const double r = std::sqrt(2.0) * p.rabi_untruncated(t);
      const double ph = p.detuning().rad_per_s() * t;
      om_r += r * std::cos(ph);
      om_i -= r * std::sin(ph);
    }
    const double u = y[0], v = y[1], w = y[2];
    dy[0] = -om_i * w - d * v - gamma * u;
    dy[1] = d * u + om_r * w - gamma * v;
    dy[2] = -om_r * v + om_i * u;
  }
};

double interval_h_max(const Interval& iv, const std::vector<Pulse>& pulses, double dt_max) {
  double h = dt_max;
  for (std::size_t i : iv.two_tones)
    h = std::min(h, kTwoPi / (20.0 * std::abs(pulses[i].detuning().rad_per_s())));
  return h;
}

struct NormGuard {
  double tol;
  bool conservative;  // T2 = ∞

  void operator()(double, const State& a, const State& b) const {
    const double na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const double nb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    const double drift = conservative ? std::abs(nb - na) : nb - na;
    if (drift > tol) throw StepTooLarge("Bloch norm changed by more than the tolerance in one step");
  }
};

void rotate(State& y, double phase, double damp) {
  const double c = std::cos(phase), s = std::sin(phase);
  const double u = y[0], v = y[1];
  y[0] = damp * (c * u - s * v);
  y[1] = damp * (s * u + c * v);
}

}  // namespace

double shift_coefficient(const Pulse& p, double delta_class, SpectralMode mode) {
  const double delta = p.detuning().rad_per_s();
  if (delta == 0.0) throw ZeroDetuning("light-shift pulse has zero detuning");
  switch (mode) {
    case SpectralMode::Uniform:
      return 1.0 / delta;
    case SpectralMode::FirstOrder:
      return (1.0 - delta_class / delta) / delta;
    case SpectralMode::Exact:
      return 1.0 / clamp_away_from_zero(delta + delta_class, p.omega0().rad_per_s(), delta);
  }
  return 1.0 / delta;
}

BlochTrajectory integrate_sequence(const ValidatedSequence& s, const Medium& m, const SpectralGrid& grid,
                                   const BlochOptions& opt) {
  const Timeline tl = build_timeline(s, opt);
  const auto& pulses = s.pulses();
  const std::size_t n = grid.size();
  const std::size_t n_samples = tl.samples.size();
  const bool conservative = std::isinf(m.T2());
  const double gamma = conservative ? 0.0 : 1.0 / m.T2();

  BlochTrajectory out;
  out.times = tl.samples;
  out.final_state.resize(n);
  out.snapshots.resize(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    out.snapshots[i].time = pulses[i].support_end();
    out.snapshots[i].after_pulse = i;
    out.snapshots[i].classes.resize(n);
  }

  const std::size_t chunk = std::max<std::size_t>(1, opt.chunk_size);
  const std::size_t chunks = chunk_count(n, chunk);
  std::vector<std::vector<std::complex<double>>> partial(chunks);
  std::vector<double> chunk_norm_error(chunks, 0.0);
  std::vector<std::size_t> chunk_steps(chunks, 0);

  parallel_chunks(n, chunk, opt.threads, [&](std::size_t begin, std::size_t end, std::size_t k) {
    auto& acc = partial[k];
    acc.assign(n_samples, {0.0, 0.0});
    std::vector<double> h(pulses.size(), 0.0);
    double norm_error = 0.0;
    std::size_t steps = 0;
    for (std::size_t j = begin; j < end; ++j) {
      const double delta = grid.detunings()[j];
      const double g = grid.weights()[j];
      for (std::size_t i = 0; i < pulses.size(); ++i)
        h[i] = pulses[i].is_probe() ? 0.0 : shift_coefficient(pulses[i], delta, opt.spectral);

      State y{0.0, 0.0, -1.0};
      double h_step = 0.0;
      double cached_len = -1.0, cached_c = 1.0, cached_s = 0.0, cached_damp = 1.0;
      for (const Interval& iv : tl.intervals) {
        const double len = iv.b - iv.a;
        switch (iv.kind) {
          case IntervalKind::Free: {
            if (len != cached_len) {
              cached_len = len;
              cached_c = std::cos(delta * len);
              cached_s = std::sin(delta * len);
              cached_damp = conservative ? 1.0 : std::exp(-gamma * len);
            }
            const double u = y[0], v = y[1];
            y[0] = cached_damp * (cached_c * u - cached_s * v);
            y[1] = cached_damp * (cached_s * u + cached_c * v);
            break;
          }
          case IntervalKind::Shift: {
            double phase = delta * len;
            for (std::size_t i : iv.shifts) {
              const double w0 = pulses[i].omega0().rad_per_s();
              phase += h[i] * w0 * w0 * pulses[i].squared_envelope_integral(iv.a, iv.b);
            }
            rotate(y, phase, conservative ? 1.0 : std::exp(-gamma * len));
            break;
          }
          case IntervalKind::Driven: {
            StepControl sc;
            sc.rtol = opt.rtol;
            sc.atol = opt.atol;
            sc.h_max = interval_h_max(iv, pulses, opt.dt_max);
            DormandPrince<3> dp(sc);
            ClassDynamics f{&pulses, &iv, &h, delta, gamma};
            steps += dp.integrate(f, y, iv.a, iv.b, h_step, NormGuard{opt.norm_tolerance, conservative});
            break;
          }
        }
        if (iv.sample >= 0) {
          acc[static_cast<std::size_t>(iv.sample)] += g * std::complex<double>(y[0], y[1]);
          if (conservative)
            norm_error = std::max(norm_error, std::abs(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - 1.0));
        }
        for (std::size_t i : iv.snapshots) out.snapshots[i].classes[j] = {y[0], y[1], y[2]};
      }
      out.final_state[j] = {y[0], y[1], y[2]};
    }
    chunk_norm_error[k] = norm_error;
    chunk_steps[k] = steps;
  });

  out.polarization.assign(n_samples, {0.0, 0.0});
  for (std::size_t k = 0; k < chunks; ++k) {
    for (std::size_t i = 0; i < n_samples; ++i) out.polarization[i] += partial[k][i];
    out.max_norm_error = std::max(out.max_norm_error, chunk_norm_error[k]);
    out.accepted_steps += chunk_steps[k];
  }
  return out;
}

EchoResult detect_echo(const BlochTrajectory& trajectory, const DetectionWindow& window) {
  std::vector<double> times;
  std::vector<std::complex<double>> field;
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const double t = trajectory.times[i];
    if (t < window.start || t > window.end) continue;
    times.push_back(t);
    field.push_back(trajectory.polarization[i]);
  }
  return detect_peak(std::move(times), std::move(field));
}

EchoResult detect_peak(std::vector<double> times, std::vector<std::complex<double>> field) {
  if (times.empty() || times.size() != field.size()) throw NoPeak("detection window holds no samples");
  EchoResult r;
  r.times = std::move(times);
  r.field = std::move(field);
  std::size_t k = 0;
  for (std::size_t i = 1; i < r.field.size(); ++i)
    if (std::norm(r.field[i]) > std::norm(r.field[k])) k = i;
  const double ik = std::norm(r.field[k]);
  if (!(ik >= 1e-12)) throw NoPeak("echo intensity below the noise floor");

  r.peak_time = r.times[k];
  r.peak_intensity = ik;
  r.peak_field = r.field[k];
  if (k > 0 && k + 1 < r.field.size()) {
    const double im = std::norm(r.field[k - 1]);
    const double ip = std::norm(r.field[k + 1]);
    const double curv = im - 2.0 * ik + ip;
    if (curv < 0.0) {
      const double x = 0.5 * (im - ip) / curv;
      const double step = 0.5 * (r.times[k + 1] - r.times[k - 1]);
      r.peak_time = r.times[k] + x * step;
      r.peak_intensity = ik - 0.25 * (im - ip) * x;
      const auto& fm = r.field[k - 1];
      const auto& f0 = r.field[k];
      const auto& fp = r.field[k + 1];
      r.peak_field = f0 + 0.5 * x * (fp - fm) + 0.5 * x * x * (fp - 2.0 * f0 + fm);
    }
  }
  return r;
}

void normalize_to(EchoResult& result, const EchoResult& reference) {
  result.ratio_to_reference = result.peak_intensity / reference.peak_intensity;
}

double single_class_phase(const Pulse& ls, double delta_class, LightShiftTreatment treatment,
                          const BlochOptions& opt) {
  if (ls.is_probe()) throw std::invalid_argument("single_class_phase needs a light-shift pulse");
  const std::vector<Pulse> pulses{ls};
  Interval iv;
  iv.a = ls.support_begin();
  iv.b = ls.support_end();
  iv.kind = IntervalKind::Driven;
  (treatment == LightShiftTreatment::TwoTone ? iv.two_tones : iv.shifts).push_back(0);
  const std::vector<double> h{shift_coefficient(ls, delta_class, opt.spectral)};

  StepControl sc;
  sc.rtol = opt.rtol;
  sc.atol = opt.atol;
  sc.h_max = interval_h_max(iv, pulses, opt.dt_max);
  DormandPrince<3> dp(sc);
  ClassDynamics f{&pulses, &iv, &h, delta_class, 0.0};

  State y{1.0, 0.0, 0.0};
  double step = 0.0;
  double wrapped = 0.0;
  double unwrapped = 0.0;
  const double t_a = iv.a;
  auto track = [&](double t, const State& a, const State& b) {
    NormGuard{opt.norm_tolerance, true}(t, a, b);
    const double ph = std::arg(std::complex<double>(b[0], b[1]) *
                               std::polar(1.0, -delta_class * (t - t_a)));
    unwrapped += std::remainder(ph - wrapped, kTwoPi);
    wrapped = ph;
  };
  dp.integrate(f, y, iv.a, iv.b, step, track);
  return unwrapped;
}

}  // namespace echoforge
