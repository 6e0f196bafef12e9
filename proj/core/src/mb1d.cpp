#include "echoforge/mb1d.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "echoforge/parallel.hpp"

namespace echoforge {

namespace {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;  // samples are t0 + n·dt, n = 0..steps

  double at(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
};

TimeGrid make_time_grid(double begin, double end, double dt_max) {
  if (!(dt_max > 0.0)) throw std::invalid_argument("time step must be positive");
  TimeGrid g;
  g.t0 = begin;
  g.steps = static_cast<std::size_t>(std::ceil((end - begin) / dt_max - 1e-9));
  g.steps = std::max<std::size_t>(g.steps, 1);
  g.dt = (end - begin) / static_cast<double>(g.steps);
  return g;
}

std::size_t auto_class_count(AngularFrequency half_span, double duration) {
  const double need = half_span.hz() * 1.5 * duration;
  return std::max<std::size_t>(201, 2 * static_cast<std::size_t>(std::ceil(need)) + 1);
}

double coupling(double alpha_L, double length, const SpectralGrid& grid) {
  const auto& d = grid.detunings();
  if (d.size() < 2) throw std::invalid_argument("propagation needs at least two classes");
  const double spacing = (d.back() - d.front()) / static_cast<double>(d.size() - 1);
  return alpha_L / length * static_cast<double>(d.size()) * spacing / kTwoPi;
}

// A light-shift channel as seen by the probe pass: |Ω_LS|² at step midpoints
// for every probe slice, and the per-class coefficient h(δ).
struct ShiftChannel {
  std::vector<std::vector<double>> mid_intensity;  // [probe node][step], full length
  std::vector<double> coefficient;                 // [class]
};

struct Pass {
  const TimeGrid* tg = nullptr;
  std::size_t n_begin = 0;  // first sample of this pass
  std::size_t n_end = 0;    // last sample (inclusive)
  const SpectralGrid* grid = nullptr;
  double kappa = 0.0;
  double dz = 0.0;
  std::size_t slices = 0;
  double gamma = 0.0;
  const std::vector<ShiftChannel>* shifts = nullptr;
  std::size_t threads = 0;
  std::size_t chunk = 64;
};

struct NodeResult {
  Field polarization;
  double excitation = 0.0;
};

// Strang step: half free precession (exact), Rodrigues rotation for drive and
// shift at the step midpoint, half free precession.
NodeResult integrate_node(const Pass& p, std::size_t node, const Field& field) {
  const std::size_t len = p.n_end - p.n_begin;
  const auto& det = p.grid->detunings();
  const auto& wts = p.grid->weights();
  const std::size_t n_classes = det.size();
  const std::size_t chunks = chunk_count(n_classes, p.chunk);
  const double dt = p.tg->dt;

  // Midpoint shift intensity per channel for this node, restricted to the pass.
  std::vector<const double*> channel_mid;
  if (p.shifts)
    for (const auto& ch : *p.shifts) channel_mid.push_back(ch.mid_intensity[node].data() + p.n_begin);

  std::vector<Field> partial(chunks);
  std::vector<double> excitation(chunks, 0.0);
  parallel_chunks(n_classes, p.chunk, p.threads, [&](std::size_t begin, std::size_t end, std::size_t k) {
    Field& acc = partial[k];
    acc.assign(len + 1, cplx{0.0, 0.0});
    double exc = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      const double delta = det[j];
      const double g = wts[j];
      const double ch = std::cos(0.5 * delta * dt), sh = std::sin(0.5 * delta * dt);
      const double cf = std::cos(delta * dt), sf = std::sin(delta * dt);
      const double dh = std::exp(-0.5 * p.gamma * dt);
      const double df = dh * dh;
      std::vector<double> coef;
      if (p.shifts)
        for (const auto& c : *p.shifts) coef.push_back(c.coefficient[j]);

      double u = 0.0, v = 0.0, w = -1.0;
      for (std::size_t n = 0; n < len; ++n) {
        const cplx om = 0.5 * (field[n] + field[n + 1]);
        double s = 0.0;
        for (std::size_t c = 0; c < coef.size(); ++c) s += channel_mid[c][n] * coef[c];
        if (om == cplx{0.0, 0.0} && s == 0.0) {
          const double un = df * (cf * u - sf * v);
          v = df * (sf * u + cf * v);
          u = un;
        } else {
          double un = dh * (ch * u - sh * v);
          v = dh * (sh * u + ch * v);
          u = un;
          const double bx = -om.real(), by = -om.imag(), bz = s;
          const double b = std::sqrt(bx * bx + by * by + bz * bz);
          const double nx = bx / b, ny = by / b, nz = bz / b;
          const double c = std::cos(b * dt), sn = std::sin(b * dt);
          const double dot = (nx * u + ny * v + nz * w) * (1.0 - c);
          const double cx = ny * w - nz * v, cy = nz * u - nx * w, cz = nx * v - ny * u;
          const double u2 = u * c + cx * sn + nx * dot;
          const double v2 = v * c + cy * sn + ny * dot;
          w = w * c + cz * sn + nz * dot;
          u = dh * (ch * u2 - sh * v2);
          v = dh * (sh * u2 + ch * v2);
        }
        acc[n + 1] += g * cplx(u, v);
      }
      exc += g * (w + 1.0);
    }
    excitation[k] = exc;
  });

  NodeResult r;
  r.polarization.assign(len + 1, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < chunks; ++k) {
    for (std::size_t n = 0; n <= len; ++n) r.polarization[n] += partial[k][n];
    r.excitation += excitation[k];
  }
  return r;
}

SliceRecord record_of(const Field& f, double dt, double z, double excitation) {
  SliceRecord r;
  r.z = z;
  r.excitation = excitation;
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double wgt = (n == 0 || n + 1 == f.size()) ? 0.5 * dt : dt;
    r.area += wgt * f[n].real();
    r.energy += wgt * std::norm(f[n]);
  }
  return r;
}

double peak_abs(const Field& f) {
  double m = 0.0;
  for (const cplx& x : f) m = std::max(m, std::abs(x));
  return m;
}

struct PassOutput {
  PassRecord record;
  Field exit_field;
  std::vector<std::vector<double>> intensity;  // |Ω|² per node, when kept
};

// Trapezoidal z-stepping in predictor-corrector form: the atoms of slice k+1
// are driven by the predicted field and their polarization is reused for the
// next step.
PassOutput run_pass(const Pass& p, Field field, bool keep_intensity) {
  PassOutput out;
  const double dt = p.tg->dt;
  auto keep = [&](const Field& f) {
    if (!keep_intensity) return;
    std::vector<double> i(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) i[n] = std::norm(f[n]);
    out.intensity.push_back(std::move(i));
  };
  const cplx step_factor(0.0, -p.kappa * p.dz);

  out.record.input_peak_rabi = peak_abs(field);
  NodeResult cur = integrate_node(p, 0, field);
  out.record.slices.push_back(record_of(field, dt, 0.0, cur.excitation));
  keep(field);
  for (std::size_t k = 0; k < p.slices; ++k) {
    Field predicted(field.size());
    for (std::size_t n = 0; n < field.size(); ++n) predicted[n] = field[n] + step_factor * cur.polarization[n];
    NodeResult next = integrate_node(p, k + 1, predicted);
    for (std::size_t n = 0; n < field.size(); ++n)
      field[n] += step_factor * 0.5 * (cur.polarization[n] + next.polarization[n]);
    cur = std::move(next);
    out.record.slices.push_back(record_of(field, dt, p.dz * static_cast<double>(k + 1), cur.excitation));
    keep(field);
  }
  out.record.output_peak_rabi = peak_abs(field);

  const auto& sl = out.record.slices;
  double deposited = 0.0;
  for (std::size_t k = 0; k + 1 < sl.size(); ++k) deposited += 0.5 * (sl[k].excitation + sl[k + 1].excitation) * p.dz;
  deposited *= 2.0 * p.kappa;
  const double e_in = sl.front().energy;
  out.record.energy_residual = e_in > 0.0 ? std::abs(e_in - sl.back().energy - deposited) / e_in : 0.0;
  out.exit_field = std::move(field);
  return out;
}

void check_slice_depth(double alpha_L, const PropagationOptions& o) {
  if (o.slices == 0) throw GridTooCoarse("propagation needs at least one slice");
  if (alpha_L / static_cast<double>(o.slices) > o.max_slice_depth)
    throw GridTooCoarse("slice optical depth " + std::to_string(alpha_L / static_cast<double>(o.slices)) +
                        " exceeds " + std::to_string(o.max_slice_depth) + "; use more slices");
}

cplx catmull_rom(const Field& f, double x) {
  const auto last = static_cast<long>(f.size()) - 1;
  long i = static_cast<long>(std::floor(x));
  i = std::clamp(i, 0L, last - 1);
  const double s = x - static_cast<double>(i);
  auto at = [&](long k) { return f[static_cast<std::size_t>(std::clamp(k, 0L, last))]; };
  const cplx p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * s + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (s * s) +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (s * s * s));
}

}  // namespace

PropagationResult propagate(const ValidatedSequence& s, const Medium& m, const PropagationOptions& o) {
  const double probe_alpha = o.probe_alpha_L > 0.0 ? o.probe_alpha_L : m.alpha_L();
  check_slice_depth(probe_alpha, o);
  check_slice_depth(m.alpha_L(), o);

  const auto& pulses = s.pulses();
  double begin = s.detection_window().start;
  double end = s.detection_window().end;
  for (const Pulse& p : pulses) {
    begin = std::min(begin, p.support_begin());
    end = std::max(end, p.support_end());
  }
  const TimeGrid tg = make_time_grid(begin, end, o.dt);
  const double gamma = std::isinf(m.T2()) ? 0.0 : 1.0 / m.T2();
  const double dz = m.length() / static_cast<double>(o.slices);

  PropagationResult result;
  result.times.resize(tg.steps + 1);
  for (std::size_t n = 0; n <= tg.steps; ++n) result.times[n] = tg.at(n);

  const SpectralGrid probe_grid = SpectralGrid::flat(
      o.probe_half_span, o.probe_classes ? o.probe_classes : auto_class_count(o.probe_half_span, end - begin));

  // Light-shift passes, one per carrier.
  std::map<AngularFrequency, std::vector<std::size_t>> carriers;
  for (std::size_t i : s.light_shift_indices()) carriers[pulses[i].detuning()].push_back(i);

  std::vector<ShiftChannel> channels;
  for (const auto& [carrier, members] : carriers) {
    double a = pulses[members.front()].support_begin();
    double b = pulses[members.front()].support_end();
    std::size_t strongest = members.front();
    for (std::size_t i : members) {
      a = std::min(a, pulses[i].support_begin());
      b = std::max(b, pulses[i].support_end());
      if (pulses[i].omega0() > pulses[strongest].omega0()) strongest = i;
    }
    Pass p;
    p.tg = &tg;
    p.n_begin = static_cast<std::size_t>(std::max(0.0, std::floor((a - tg.t0) / tg.dt)));
    p.n_end = std::min(tg.steps, static_cast<std::size_t>(std::ceil((b - tg.t0) / tg.dt)));
    const SpectralGrid ls_grid = SpectralGrid::flat(
        o.ls_half_span, o.ls_classes ? o.ls_classes : auto_class_count(o.ls_half_span, b - a));
    p.grid = &ls_grid;
    p.kappa = coupling(m.alpha_L(), m.length(), ls_grid);
    p.dz = dz;
    p.slices = o.slices;
    p.gamma = gamma;
    p.threads = o.threads;
    p.chunk = o.chunk_size;

    Field input(p.n_end - p.n_begin + 1);
    for (std::size_t n = 0; n < input.size(); ++n) {
      double r = 0.0;
      for (std::size_t i : members) r += pulses[i].rabi(tg.at(p.n_begin + n));
      input[n] = r;
    }
    PassOutput out = run_pass(p, std::move(input), true);
    out.record.carrier_detuning = carrier;

    ShiftChannel ch;
    ch.mid_intensity.assign(o.slices + 1, std::vector<double>(tg.steps, 0.0));
    for (std::size_t node = 0; node <= o.slices; ++node) {
      // The light-shift beam enters at z = L: its node `node` is probe node N − node.
      const auto& in = out.intensity[node];
      auto& mid = ch.mid_intensity[o.slices - node];
      for (std::size_t n = 0; n + 1 < in.size(); ++n) mid[p.n_begin + n] = 0.5 * (in[n] + in[n + 1]);
    }
    ch.coefficient.resize(probe_grid.size());
    for (std::size_t j = 0; j < probe_grid.size(); ++j)
      ch.coefficient[j] = shift_coefficient(pulses[strongest], probe_grid.detunings()[j], o.spectral);
    channels.push_back(std::move(ch));
    result.light_shift.push_back(std::move(out.record));
  }

  Pass p;
  p.tg = &tg;
  p.n_begin = 0;
  p.n_end = tg.steps;
  p.grid = &probe_grid;
  p.kappa = coupling(probe_alpha, m.length(), probe_grid);
  p.dz = dz;
  p.slices = o.slices;
  p.gamma = gamma;
  p.shifts = &channels;
  p.threads = o.threads;
  p.chunk = o.chunk_size;

  Field input(tg.steps + 1);
  for (std::size_t n = 0; n <= tg.steps; ++n) {
    double r = 0.0;
    for (std::size_t i : s.probe_indices()) r += pulses[i].rabi(tg.at(n));
    input[n] = r;
  }
  PassOutput out = run_pass(p, std::move(input), false);
  result.probe = std::move(out.record);
  result.output_field = std::move(out.exit_field);

  std::vector<double> times = sample_times(s.detection_window(), o.sample_step);
  Field echo(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) echo[k] = catmull_rom(result.output_field, (times[k] - tg.t0) / tg.dt);
  result.echo = detect_peak(std::move(times), std::move(echo));
  return result;
}

AreaTheoremCheck area_theorem_check(double A0, double alpha_L, const PropagationOptions& o) {
  if (!(A0 > 0.0) || !(alpha_L > 0.0)) throw std::invalid_argument("area check needs A0 > 0 and alpha_L > 0");
  check_slice_depth(alpha_L, o);
  constexpr double tau = 3e-6;
  constexpr double tail = 30e-6;
  const Pulse pulse = Pulse::probe(kSupportWidths * tau, tau,
                                   AngularFrequency::radians_per_second(A0 / (2.0 * std::sqrt(kPi) * tau)), 1.0);
  const TimeGrid tg = make_time_grid(0.0, pulse.support_end() + tail, o.dt);
  const SpectralGrid grid = SpectralGrid::flat(
      o.ls_half_span, o.ls_classes ? o.ls_classes : auto_class_count(o.ls_half_span, tg.at(tg.steps)));

  Pass p;
  p.tg = &tg;
  p.n_begin = 0;
  p.n_end = tg.steps;
  p.grid = &grid;
  p.kappa = coupling(alpha_L, 1.0, grid);
  p.dz = 1.0 / static_cast<double>(o.slices);
  p.slices = o.slices;
  p.threads = o.threads;
  p.chunk = o.chunk_size;

  Field input(tg.steps + 1);
  for (std::size_t n = 0; n <= tg.steps; ++n) input[n] = pulse.rabi(tg.at(n));
  const PassOutput out = run_pass(p, std::move(input), false);

  AreaTheoremCheck r;
  for (const SliceRecord& sl : out.record.slices) {
    r.z.push_back(sl.z);
    r.simulated.push_back(sl.area);
  }
  // RK4 on dA/dz = −(α/2) sin A, 32 substeps per slice.
  const double alpha = alpha_L;
  auto rhs = [&](double a) { return -0.5 * alpha * std::sin(a); };
  double a = r.simulated.front();
  r.ode.push_back(a);
  const int sub = 32;
  const double h = p.dz / sub;
  for (std::size_t k = 0; k < o.slices; ++k) {
    for (int i = 0; i < sub; ++i) {
      const double k1 = rhs(a), k2 = rhs(a + 0.5 * h * k1), k3 = rhs(a + 0.5 * h * k2), k4 = rhs(a + h * k3);
      a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r.ode.push_back(a);
  }
  for (std::size_t k = 0; k < r.ode.size(); ++k)
    r.max_relative_deviation = std::max(r.max_relative_deviation, std::abs(r.simulated[k] - r.ode[k]) / std::abs(r.ode[k]));
  r.energy_transmission = out.record.slices.back().energy / out.record.slices.front().energy;
  r.exit_peak_ratio = out.record.output_peak_rabi / out.record.input_peak_rabi;
  r.energy_residual = out.record.energy_residual;
  return r;
}

}  // namespace echoforge
