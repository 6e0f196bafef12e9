#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "echoforge/core.hpp"
#include "echoforge/phaseledger.hpp"

namespace echoforge::seq {

// 1-based line and column; length in bytes (0 for a position).
struct Span {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;
  bool operator==(const Span&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  Span span;
  std::string message;
};

// `file:line:col: severity: message`
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

enum class Dimension { Time, Frequency, Length, Number, Integer, Word, Text };

// A right-hand side as written, plus its decoded value.
struct Value {
  std::string text;
  Span span;
  Dimension dimension = Dimension::Text;
  double si = 0.0;                 // seconds, Hz (linear), meters or plain number
  std::optional<double> range_to;  // `a..b` ranges in sweep directives
  std::string word;                // enum words and names
};

struct Param {
  std::string key;
  Span key_span;
  Value value;
};

enum class DirectiveKind { Medium, Grid, Pulse, Detect, Sweep };

struct Directive {
  DirectiveKind kind = DirectiveKind::Medium;
  Span span;                      // the directive keyword
  std::optional<Value> subkind;   // `probe` or `ls` for pulses
  std::vector<Param> params;

  const Param* find(std::string_view key) const;
};

struct SequenceSource {
  std::string text;
  std::vector<Directive> directives;
};

struct ParseResult {
  SequenceSource source;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

// Never throws on malformed input; every problem becomes a diagnostic and
// parsing resumes at the next token or line.
ParseResult parse(std::string_view text);

// Canonical text: one directive per line, parameters in source order, values
// spelled as written.
std::string print(const SequenceSource& s);

// Same directives, parameters and decoded values; spans and spacing ignored.
bool structurally_equal(const SequenceSource& a, const SequenceSource& b);

struct Job {
  std::size_t index = 0;
  std::string label;
  // Swept parameter values in the unit written in the file, keyed like `ls1.detuning`.
  std::vector<std::pair<std::string, double>> parameters;
  std::optional<ValidatedSequence> sequence;  // empty when the job failed validation
  std::string error;
};

struct Experiment {
  Medium medium;
  SpectralGrid grid;
  SpectralMode spectral = SpectralMode::FirstOrder;
  std::size_t slices = 64;
  double sample_step = 0.01e-6;
  Sequence base;
  std::vector<std::string> pulse_names;  // parallel to base.pulses
  std::vector<std::pair<std::string, std::string>> swept;  // (name.field, unit) in sweep order
  std::vector<Job> jobs;  // one job without a sweep directive
};

struct LowerResult {
  std::optional<Experiment> experiment;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

LowerResult lower(const SequenceSource& s);

// parse + lower, with parse diagnostics short-circuiting lowering.
LowerResult compile(std::string_view text);

}  // namespace echoforge::seq
