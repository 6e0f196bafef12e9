#include "runner.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <json.hpp>
#include <sstream>

#include "echoforge/bloch.hpp"
#include "echoforge/mb1d.hpp"
#include "echoforge/parallel.hpp"
#include "echoforge/phaseledger.hpp"
#include "echoforge/transverse.hpp"
#include "echoforge/version.hpp"

namespace echoforge::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::Analytic: return "analytic";
    case Tier::Bloch: return "bloch";
    case Tier::Mb1d: return "mb1d";
  }
  return "?";
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

struct TierEcho {
  std::vector<double> times;
  std::vector<double> intensity;
  double peak_time = 0.0;
  double peak_intensity = 0.0;
};

TierEcho simulate(const seq::Experiment& ex, const ValidatedSequence& s, const RunConfig& cfg,
                  std::size_t threads) {
  TierEcho out;
  switch (cfg.tier) {
    case Tier::Analytic: {
      const AnalyticEcho e = analytic_echo(s, ex.grid, ex.medium.T2(), ex.spectral, ex.sample_step);
      out.times = e.times;
      for (const auto& a : e.amplitude) out.intensity.push_back(std::norm(a));
      out.peak_time = e.peak_time;
      out.peak_intensity = e.peak_intensity;
      return out;
    }
    case Tier::Bloch: {
      BlochOptions o;
      o.spectral = ex.spectral;
      o.rtol = cfg.tol;
      o.atol = cfg.tol * 1e-2;
      o.sample_step = ex.sample_step;
      o.threads = threads;
      const EchoResult e = detect_echo(integrate_sequence(s, ex.medium, ex.grid, o), s.detection_window());
      out.times = e.times;
      for (const auto& a : e.field) out.intensity.push_back(std::norm(a));
      out.peak_time = e.peak_time;
      out.peak_intensity = e.peak_intensity;
      return out;
    }
    case Tier::Mb1d: {
      PropagationOptions o;
      o.slices = ex.slices;
      o.spectral = ex.spectral;
      o.sample_step = ex.sample_step;
      o.threads = threads;
      const EchoResult e = propagate(s, ex.medium, o).echo;
      out.times = e.times;
      for (const auto& a : e.field) out.intensity.push_back(std::norm(a));
      out.peak_time = e.peak_time;
      out.peak_intensity = e.peak_intensity;
      return out;
    }
  }
  return out;
}

std::string hexd(double v) { return fmt::format("{:a}", v); }

std::string pulse_key(const Pulse& p) {
  return fmt::format("{}:{}:{}:{}:{}:{}", p.is_probe() ? 'P' : 'L', hexd(p.t0()), hexd(p.tau()),
                     hexd(p.omega0().rad_per_s()), hexd(p.detuning().rad_per_s()), hexd(p.waist()));
}

}  // namespace

// Reference (no light-shift) runs shared between jobs. The first job to ask for
// a key computes it; concurrent askers wait on the same future.
class ReferenceCache {
 public:
  TierEcho get(const seq::Experiment& ex, const ValidatedSequence& s, const RunConfig& cfg, std::size_t threads) {
    const ValidatedSequence ref = s.without_light_shift();
    std::string key = fmt::format("{}|{}|{}|{}|{}", tier_name(cfg.tier), hexd(cfg.tol), hexd(ref.t12()),
                                  hexd(ref.detection_window().start), hexd(ref.detection_window().end));
    for (const Pulse& p : ref.pulses()) key += "|" + pulse_key(p);

    std::promise<TierEcho> promise;
    std::shared_future<TierEcho> future;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        future = promise.get_future().share();
        entries_.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(simulate(ex, ref, cfg, threads));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_future<TierEcho>> entries_;
};

JobOutcome run_job(const seq::Experiment& ex, const ValidatedSequence& s, const RunConfig& cfg,
                   std::size_t inner_threads, ReferenceCache& cache) {
  JobOutcome out;
  try {
    const TierEcho ref = cache.get(ex, s, cfg, inner_threads);
    const TierEcho echo = s.light_shift_indices().empty() ? ref : simulate(ex, s, cfg, inner_threads);
    const PhaseLedger ledger = build_ledger(s);
    out.phi_I = ledger.phi_I;
    out.phi_II = ledger.phi_II;
    out.predicted_echo_time = predict_echo_time(s);
    out.eta = cfg.transverse ? compensated_modulation(s) : 1.0;
    const double norm = ref.peak_intensity;
    out.times = echo.times;
    for (double i : echo.intensity) out.intensity.push_back(i / norm * out.eta);
    out.peak_time = echo.peak_time;
    out.peak_intensity = echo.peak_intensity / norm * out.eta;
    out.ratio = out.peak_intensity;
    out.ok = std::isfinite(out.ratio);
    if (!out.ok) out.message = "non-finite echo intensity";
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
  }
  return out;
}

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

std::string num(double v) { return fmt::format("{:.12g}", v); }


bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

// Reads and compiles a .seq file, printing diagnostics. Empty on failure.
std::optional<seq::Experiment> load(const std::string& path, std::string& text) {
  if (!read_file(path, text)) {
    std::cerr << path << ": error: cannot read file\n";
    return std::nullopt;
  }
  seq::LowerResult r = seq::compile(text);
  for (const auto& d : r.diagnostics) std::cerr << seq::format_diagnostic(d, path) << "\n";
  if (!r.ok()) return std::nullopt;
  return std::move(*r.experiment);
}

json manifest(const std::string& text, const RunConfig& cfg) {
  json m;
  m["input_fnv1a"] = fmt::format("{:016x}", fnv1a(text));
  m["tier"] = tier_name(cfg.tier);
  m["transverse"] = cfg.transverse;
  m["tolerances"] = {{"rel", cfg.tol}};
  m["deterministic"] = true;
  m["version"] = kVersion;
  return m;
}

bool write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  return static_cast<bool>(out);
}

int cmd_run(const std::string& path, const RunConfig& cfg, const std::string& out_dir) {
  std::string text;
  auto ex = load(path, text);
  if (!ex) return kExitInput;
  if (!ex->swept.empty()) {
    std::cerr << path << ": error: file contains a sweep directive; use `echoforge sweep`\n";
    return kExitInput;
  }
  ReferenceCache cache;
  const std::size_t threads = cfg.jobs ? cfg.jobs : default_thread_count();
  const JobOutcome r = run_job(*ex, *ex->jobs.front().sequence, cfg, threads, cache);
  if (!r.ok) {
    std::cerr << path << ": error: " << r.message << "\n";
    return kExitNumerical;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::string csv = "time_us,intensity\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    csv += num(r.times[i] / kMicrosecond) + "," + num(r.intensity[i]) + "\n";

  json summary;
  summary["peak_time_us"] = r.peak_time / kMicrosecond;
  summary["peak_intensity"] = r.peak_intensity;
  summary["ratio_to_reference"] = r.ratio;
  summary["eta"] = cfg.transverse ? json(r.eta) : json(nullptr);
  summary["phi_I"] = r.phi_I;
  summary["phi_II"] = r.phi_II;
  summary["predicted_echo_time_us"] = r.predicted_echo_time / kMicrosecond;
  summary["manifest"] = manifest(text, cfg);

  if (!write_text(fs::path(out_dir) / "echo_trace.csv", csv) ||
      !write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n")) {
    std::cerr << out_dir << ": error: cannot write results\n";
    return kExitInput;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& path, const RunConfig& cfg, const std::string& out_dir) {
  std::string text;
  auto ex = load(path, text);
  if (!ex) return kExitInput;
  if (ex->swept.empty()) {
    std::cerr << path << ": error: file has no sweep directive\n";
    return kExitInput;
  }

  const std::size_t workers = cfg.jobs ? cfg.jobs : default_thread_count();
  const std::size_t inner = workers > 1 ? 1 : 0;
  std::vector<JobOutcome> results(ex->jobs.size());
  ReferenceCache cache;
  parallel_chunks(ex->jobs.size(), 1, workers, [&](std::size_t i, std::size_t, std::size_t) {
    const seq::Job& job = ex->jobs[i];
    if (!job.sequence) {
      results[i].message = job.error;
      return;
    }
    results[i] = run_job(*ex, *job.sequence, cfg, inner ? inner : default_thread_count(), cache);
  });

  std::string csv = "index,label";
  for (const auto& [key, unit] : ex->swept) csv += "," + key + (unit.empty() ? "" : "_" + unit);
  csv += ",eta,ratio,peak_time_us,peak_intensity,status,message\n";
  bool failed = false;
  for (std::size_t i = 0; i < ex->jobs.size(); ++i) {
    const seq::Job& job = ex->jobs[i];
    const JobOutcome& r = results[i];
    csv += std::to_string(job.index) + "," + job.label;
    for (const auto& p : job.parameters) csv += "," + num(p.second);
    if (r.ok) {
      csv += "," + (cfg.transverse ? num(r.eta) : std::string()) + "," + num(r.ratio) + "," +
             num(r.peak_time / kMicrosecond) + "," + num(r.peak_intensity) + ",ok,\n";
    } else {
      failed = true;
      std::string msg = r.message;
      for (char& c : msg)
        if (c == ',' || c == '\n' || c == '"') c = ' ';
      csv += ",,,,,error," + msg + "\n";
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  json m = manifest(text, cfg);
  if (!write_text(fs::path(out_dir) / "sweep.csv", csv) ||
      !write_text(fs::path(out_dir) / "manifest.json", m.dump(2) + "\n")) {
    std::cerr << out_dir << ": error: cannot write results\n";
    return kExitInput;
  }
  if (failed) {
    std::cerr << path << ": error: one or more sweep jobs failed (see sweep.csv)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_check(const std::string& path) {
  std::string text;
  return load(path, text) ? kExitOk : kExitInput;
}

int cmd_fmt(const std::string& path) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << path << ": error: cannot read file\n";
    return kExitInput;
  }
  const seq::ParseResult r = seq::parse(text);
  for (const auto& d : r.diagnostics) std::cerr << seq::format_diagnostic(d, path) << "\n";
  if (!r.ok()) return kExitInput;
  std::cout << seq::print(r.source);
  return kExitOk;
}

}  // namespace

int main(int argc, const char* const* argv) {
  CLI::App app{"Two-pulse photon-echo simulator with light-shift control pulses", "echoforge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig cfg;
  std::string file;
  std::string out_dir = ".";
  std::string tier = "analytic";
  std::string transverse = "off";

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("file", file, ".seq experiment file")->required();
    sub->add_option("--tier", tier, "model tier")
        ->check(CLI::IsMember({"analytic", "bloch", "mb1d"}))
        ->capture_default_str();
    sub->add_option("--transverse", transverse, "apply the transverse modulation factor")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "worker threads (default: ECHOFORGE_THREADS or all cores)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "relative integration tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };
  CLI::App* run = app.add_subcommand("run", "simulate one sequence");
  add_run_options(run);
  CLI::App* sweep = app.add_subcommand("sweep", "run every job of a sweep directive");
  add_run_options(sweep);
  CLI::App* check = app.add_subcommand("check", "parse and validate a file");
  check->add_option("file", file)->required();
  CLI::App* fmt_cmd = app.add_subcommand("fmt", "print a file in canonical form");
  fmt_cmd->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  cfg.tier = tier == "bloch" ? Tier::Bloch : tier == "mb1d" ? Tier::Mb1d : Tier::Analytic;
  cfg.transverse = transverse == "on";
  if (*run) return cmd_run(file, cfg, out_dir);
  if (*sweep) return cmd_sweep(file, cfg, out_dir);
  if (*check) return cmd_check(file);
  return cmd_fmt(file);
}

}  // namespace echoforge::cli
