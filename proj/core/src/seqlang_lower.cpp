#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "echoforge/seqlang.hpp"
#include "seqlang_keys.hpp"

namespace echoforge::seq {

namespace {

constexpr double kDefaultProbeWaist = 50e-6;
constexpr double kDefaultLightShiftWaist = 110e-6;
constexpr double kDefaultLength = 1e-3;
constexpr double kDefaultInhomHz = 1e9;
constexpr double kDefaultWindowHalfWidth = 10e-6;

struct PulseDecl {
  const Directive* directive;
  bool probe;
  std::string name;
};

struct SweepField {
  std::string key;  // name.field
  std::string unit;
  double unit_scale = 1.0;
  std::size_t pulse = 0;  // index into pulses
  std::string field;
  double from = 0.0;
  double to = 0.0;
  Span span;
};

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

// Trailing unit letters of a quantity literal and their scale to SI.
std::pair<std::string, double> unit_of(std::string_view literal) {
  std::size_t i = literal.size();
  while (i > 0 && std::isalpha(static_cast<unsigned char>(literal[i - 1]))) --i;
  const std::string unit(literal.substr(i));
  static const std::map<std::string, double> scale{
      {"s", 1.0},   {"ms", 1e-3},  {"us", 1e-6},  {"ns", 1e-9}, {"Hz", 1.0}, {"kHz", 1e3},
      {"MHz", 1e6}, {"GHz", 1e9},  {"m", 1.0},    {"mm", 1e-3}, {"um", 1e-6}};
  auto it = scale.find(unit);
  return {unit, it == scale.end() ? 1.0 : it->second};
}

class Lowerer {
 public:
  explicit Lowerer(const SequenceSource& s) : src_(s) {}

  LowerResult run() {
    collect();
    auto medium = build_medium();
    build_grid();
    build_pulses();
    const bool have_pulses = build_base();
    build_sweep();
    if (!errors() && medium && have_pulses) build_jobs(*medium);
    if (errors()) {
      r_.experiment.reset();
    }
    return std::move(r_);
  }

 private:
  bool errors() const { return !r_.diagnostics.empty(); }

  void error(Span span, std::string msg) { r_.diagnostics.push_back({Severity::Error, span, std::move(msg)}); }

  void collect() {
    for (const Directive& d : src_.directives) {
      switch (d.kind) {
        case DirectiveKind::Medium: single(medium_, d, "medium"); break;
        case DirectiveKind::Grid: single(grid_, d, "grid"); break;
        case DirectiveKind::Detect: single(detect_, d, "detect"); break;
        case DirectiveKind::Sweep: single(sweep_, d, "sweep"); break;
        case DirectiveKind::Pulse: pulses_.push_back({&d, d.subkind && d.subkind->word == "probe", ""}); break;
      }
    }
  }

  void single(const Directive*& slot, const Directive& d, const char* what) {
    if (slot) {
      error(d.span, std::string("duplicate ") + what + " directive (first on line " + std::to_string(slot->span.line) + ")");
      return;
    }
    slot = &d;
  }

  const Param* require(const Directive& d, const char* key, const char* what) {
    const Param* p = d.find(key);
    if (!p) error(d.span, std::string(what) + " needs '" + key + "'");
    return p;
  }

  std::optional<Medium> build_medium() {
    if (!medium_) {
      error({1, 1, 0}, "missing medium directive");
      return std::nullopt;
    }
    const Param* od = require(*medium_, "od", "medium");
    const Param* t2 = require(*medium_, "t2", "medium");
    if (!od || !t2) return std::nullopt;
    const Param* inhom = medium_->find("inhom");
    const Param* length = medium_->find("length");
    try {
      return Medium(od->value.si, t2->value.si,
                    AngularFrequency::from_hz(inhom ? inhom->value.si : kDefaultInhomHz),
                    length ? length->value.si : kDefaultLength);
    } catch (const std::exception& e) {
      error(medium_->span, e.what());
      return std::nullopt;
    }
  }

  void build_grid() {
    if (!grid_) return;
    if (const Param* p = grid_->find("span")) half_span_hz_ = p->value.si;
    if (const Param* p = grid_->find("classes")) classes_ = static_cast<std::size_t>(p->value.si);
    if (const Param* p = grid_->find("slices")) slices_ = static_cast<std::size_t>(p->value.si);
    if (const Param* p = grid_->find("spectral")) {
      const std::string& w = p->value.word;
      spectral_ = w == "uniform" ? SpectralMode::Uniform : w == "exact" ? SpectralMode::Exact : SpectralMode::FirstOrder;
    }
  }

  void build_pulses() {
    std::size_t n_probe = 0, n_ls = 0;
    std::map<std::string, const Param*> seen;
    for (PulseDecl& p : pulses_) {
      const Directive& d = *p.directive;
      if (const Param* name = d.find("name")) {
        p.name = name->value.word;
        auto [it, inserted] = seen.emplace(p.name, name);
        if (!inserted) error(name->value.span, "duplicate pulse name '" + p.name + "'");
      } else {
        p.name = p.probe ? "probe" + std::to_string(++n_probe) : "ls" + std::to_string(++n_ls);
      }
    }
    // Default names may collide with explicit ones.
    for (PulseDecl& p : pulses_) {
      if (p.directive->find("name")) continue;
      if (seen.count(p.name)) error(p.directive->span, "default name '" + p.name + "' is already taken");
    }
  }

  // Builds the unswept sequence; returns false when pulses are missing.
  bool build_base() {
    std::vector<std::size_t> probes;
    bool complete = true;
    for (std::size_t i = 0; i < pulses_.size(); ++i) {
      const PulseDecl& p = pulses_[i];
      const Directive& d = *p.directive;
      const char* what = p.probe ? "probe pulse" : "light-shift pulse";
      const Param* t = require(d, "t", what);
      const Param* tau = require(d, "tau", what);
      const Param* rabi = require(d, "rabi", what);
      const Param* det = p.probe ? nullptr : require(d, "detuning", what);
      if (!t || !tau || !rabi || (!p.probe && !det)) {
        complete = false;
        continue;
      }
      const Param* waist = d.find("waist");
      const double w = waist ? waist->value.si : (p.probe ? kDefaultProbeWaist : kDefaultLightShiftWaist);
      try {
        base_.pulses.push_back(
            p.probe ? Pulse::probe(t->value.si, tau->value.si, AngularFrequency::from_hz(rabi->value.si), w)
                    : Pulse::light_shift(t->value.si, tau->value.si, AngularFrequency::from_hz(rabi->value.si),
                                         AngularFrequency::from_hz(det->value.si), w));
        names_.push_back(p.name);
        decl_of_.push_back(i);
      } catch (const std::exception& e) {
        error(d.span, e.what());
        complete = false;
      }
      if (p.probe) probes.push_back(i);
    }
    if (probes.empty()) {
      error({1, 1, 0}, "missing probe pulses (a two-pulse echo needs probe pulses at t=0 and t=t12)");
      return false;
    }
    if (probes.size() == 1) {
      error(pulses_[probes[0]].directive->span, "a two-pulse echo needs a second probe pulse at t=t12");
      return false;
    }
    if (probes.size() > 2) {
      error(pulses_[probes[2]].directive->span, "a two-pulse echo takes exactly two probe pulses");
      return false;
    }
    if (!complete) return false;
    set_timing(base_);

    if (detect_) {
      const Param* from = require(*detect_, "from", "detect");
      const Param* to = require(*detect_, "to", "detect");
      if (!from || !to) return false;
      window_ = DetectionWindow{from->value.si, to->value.si};
      if (const Param* step = detect_->find("step")) step_ = step->value.si;
      base_.detection_window = *window_;
    }
    return true;
  }

  void set_timing(Sequence& s) const {
    double t12 = 0.0;
    for (const Pulse& p : s.pulses)
      if (p.is_probe()) t12 = std::max(t12, p.t0());
    s.t12 = t12;
    if (!window_) s.detection_window = {std::max(0.0, 2.0 * t12 - kDefaultWindowHalfWidth), 2.0 * t12 + kDefaultWindowHalfWidth};
  }

  void build_sweep() {
    if (!sweep_) return;
    const Param* steps = require(*sweep_, "steps", "sweep");
    if (steps) steps_ = static_cast<std::size_t>(steps->value.si);
    for (const Param& p : sweep_->params) {
      if (p.key == "steps") continue;
      const std::size_t dot = p.key.rfind('.');
      const std::string name = p.key.substr(0, dot);
      SweepField f;
      f.key = p.key;
      f.field = p.key.substr(dot + 1);
      f.from = p.value.si;
      f.to = *p.value.range_to;
      f.span = p.key_span;
      std::tie(f.unit, f.unit_scale) = unit_of(p.value.text.substr(0, p.value.text.find("..")));
      auto it = std::find(names_.begin(), names_.end(), name);
      if (it == names_.end()) {
        error({p.key_span.line, p.key_span.column, dot}, "no pulse named '" + name + "'");
        continue;
      }
      f.pulse = static_cast<std::size_t>(it - names_.begin());
      if (f.field == "detuning" && base_.pulses[f.pulse].is_probe()) {
        error(p.key_span, "probe pulses are resonant and take no detuning");
        continue;
      }
      fields_.push_back(std::move(f));
    }
    if (fields_.empty() && steps) error(sweep_->span, "sweep needs at least one NAME.FIELD=FROM..TO range");
  }

  static void apply(Pulse& p, const std::string& field, double v, double base_rabi_hz) {
    if (field == "t") p = p.with_t0(v);
    else if (field == "tau") p = p.with_tau(v);
    else if (field == "rabi") p = p.with_omega0(AngularFrequency::from_hz(v));
    else if (field == "detuning") p = p.with_detuning(AngularFrequency::from_hz(v));
    else if (field == "waist") p = p.with_waist(v);
    else if (field == "intensity") p = p.with_omega0(AngularFrequency::from_hz(base_rabi_hz * std::sqrt(v)));
  }

  // Maps a validation failure of the unswept sequence back to the source.
  void report(const SequenceError& e) {
    Span span{1, 1, 0};
    if (e.pulse_index()) {
      const Directive& d = *pulses_[decl_of_[*e.pulse_index()]].directive;
      const Param* t = d.find("t");
      span = t ? t->value.span : d.span;
    } else if (detect_) {
      span = detect_->span;
    }
    error(span, e.what());
  }

  void build_jobs(const Medium& medium) {
    Experiment ex{medium,
                  SpectralGrid::flat(AngularFrequency::from_hz(half_span_hz_), classes_),
                  spectral_,
                  slices_,
                  step_,
                  base_,
                  names_,
                  {},
                  {}};
    if (!sweep_) {
      Job job;
      job.label = "base";
      try {
        job.sequence = validate_sequence(base_);
      } catch (const SequenceError& e) {
        report(e);
        return;
      }
      ex.jobs.push_back(std::move(job));
      r_.experiment = std::move(ex);
      return;
    }

    for (const SweepField& f : fields_) ex.swept.emplace_back(f.key, f.unit);
    for (std::size_t k = 0; k < steps_; ++k) {
      Job job;
      job.index = k;
      Sequence s = base_;
      const double x = steps_ > 1 ? static_cast<double>(k) / static_cast<double>(steps_ - 1) : 0.0;
      try {
        for (const SweepField& f : fields_) {
          const double v = k + 1 == steps_ && steps_ > 1 ? f.to : f.from + (f.to - f.from) * x;
          const double display = v / f.unit_scale;
          job.parameters.emplace_back(f.key, display);
          job.label += (job.label.empty() ? "" : ";") + f.key + "=" + format_number(display) + f.unit;
          apply(s.pulses[f.pulse], f.field, v, base_.pulses[f.pulse].omega0().hz());
        }
        set_timing(s);
        job.sequence = validate_sequence(s);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
      ex.jobs.push_back(std::move(job));
    }
    r_.experiment = std::move(ex);
  }

  const SequenceSource& src_;
  LowerResult r_;
  const Directive* medium_ = nullptr;
  const Directive* grid_ = nullptr;
  const Directive* detect_ = nullptr;
  const Directive* sweep_ = nullptr;
  std::vector<PulseDecl> pulses_;
  std::vector<std::string> names_;     // per built pulse
  std::vector<std::size_t> decl_of_;   // built pulse -> pulses_ index
  Sequence base_;
  std::optional<DetectionWindow> window_;
  double step_ = 0.01e-6;
  double half_span_hz_ = 2e6;
  std::size_t classes_ = 4001;
  std::size_t slices_ = 64;
  SpectralMode spectral_ = SpectralMode::FirstOrder;
  std::size_t steps_ = 1;
  std::vector<SweepField> fields_;
};

}  // namespace

bool LowerResult::ok() const { return experiment.has_value() && diagnostics.empty(); }

LowerResult lower(const SequenceSource& s) { return Lowerer(s).run(); }

LowerResult compile(std::string_view text) {
  ParseResult p = parse(text);
  if (!p.ok()) {
    LowerResult r;
    r.diagnostics = std::move(p.diagnostics);
    return r;
  }
  return lower(p.source);
}

}  // namespace echoforge::seq
