#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "echoforge/seqlang.hpp"
#include "seqlang_keys.hpp"

namespace echoforge::seq {

namespace {

struct Unit {
  std::string_view suffix;
  Dimension dimension;
  int exponent;
};

constexpr Unit kUnits[] = {
    {"s", Dimension::Time, 0},        {"ms", Dimension::Time, -3},     {"us", Dimension::Time, -6},
    {"ns", Dimension::Time, -9},      {"Hz", Dimension::Frequency, 0}, {"kHz", Dimension::Frequency, 3},
    {"MHz", Dimension::Frequency, 6}, {"GHz", Dimension::Frequency, 9}, {"m", Dimension::Length, 0},
    {"mm", Dimension::Length, -3},    {"um", Dimension::Length, -6},
};

const char* dimension_hint(Dimension d) {
  switch (d) {
    case Dimension::Time: return "a time (s, ms, us, ns)";
    case Dimension::Frequency: return "a frequency (Hz, kHz, MHz, GHz)";
    case Dimension::Length: return "a length (m, mm, um)";
    case Dimension::Number: return "a plain number";
    case Dimension::Integer: return "a whole number";
    case Dimension::Word: return "a word";
    case Dimension::Text: return "text";
  }
  return "a value";
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run() {
    ParseResult r;
    r.source.text = std::string(text_);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t eol = std::min(text_.find('\n', pos), text_.size());
      ++line_no;
      parse_line(text_.substr(pos, eol - pos), line_no, r);
      if (eol == text_.size()) break;
      pos = eol + 1;
    }
    return r;
  }

 private:
  void error(ParseResult& r, std::size_t line, std::size_t col, std::size_t len, std::string msg) {
    r.diagnostics.push_back({Severity::Error, {line, col, std::max<std::size_t>(len, 1)}, std::move(msg)});
  }

  void parse_line(std::string_view line, std::size_t line_no, ParseResult& r) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      tokens.push_back({line.substr(start, i - start), start + 1});
    }
    if (tokens.empty()) return;

    const Token& head = tokens.front();
    Directive d;
    d.span = {line_no, head.column, head.text.size()};
    const auto kind = directive_kind(head.text);
    if (!kind) {
      error(r, line_no, head.column, head.text.size(),
            "unknown directive '" + std::string(head.text) + "' (expected medium, grid, pulse, detect or sweep)");
      return;
    }
    d.kind = *kind;

    std::size_t first_param = 1;
    PulseRole role = PulseRole::None;
    if (d.kind == DirectiveKind::Pulse) {
      if (tokens.size() < 2 || tokens[1].text.find('=') != std::string_view::npos) {
        const std::size_t col = tokens.size() < 2 ? head.column + head.text.size() : tokens[1].column;
        const std::size_t len = tokens.size() < 2 ? 0 : tokens[1].text.size();
        error(r, line_no, tokens.size() < 2 ? head.column : col, tokens.size() < 2 ? head.text.size() : len,
              "pulse needs a kind: 'probe' or 'ls'");
        return;
      }
      const Token& k = tokens[1];
      if (k.text != "probe" && k.text != "ls") {
        error(r, line_no, k.column, k.text.size(),
              "unknown pulse kind '" + std::string(k.text) + "' (expected probe or ls)");
        return;
      }
      Value v;
      v.text = std::string(k.text);
      v.span = {line_no, k.column, k.text.size()};
      v.dimension = Dimension::Word;
      v.word = v.text;
      d.subkind = v;
      role = k.text == "probe" ? PulseRole::Probe : PulseRole::LightShift;
      first_param = 2;
    }

    for (std::size_t t = first_param; t < tokens.size(); ++t) {
      const Token& tok = tokens[t];
      const std::size_t eq = tok.text.find('=');
      if (eq == std::string_view::npos) {
        error(r, line_no, tok.column, tok.text.size(), "expected key=value, found '" + std::string(tok.text) + "'");
        continue;
      }
      Param p;
      p.key = std::string(tok.text.substr(0, eq));
      p.key_span = {line_no, tok.column, eq};
      if (p.key.empty()) {
        error(r, line_no, tok.column, 1, "missing key before '='");
        continue;
      }
      const std::string_view raw = tok.text.substr(eq + 1);
      p.value.text = std::string(raw);
      p.value.span = {line_no, tok.column + eq + 1, raw.size()};
      if (raw.empty()) {
        error(r, line_no, tok.column + eq, 1, "missing value after '" + p.key + "='");
        continue;
      }
      if (std::any_of(d.params.begin(), d.params.end(), [&](const Param& q) { return q.key == p.key; })) {
        error(r, line_no, tok.column, eq, "duplicate key '" + p.key + "'");
        continue;
      }
      const KeySpec* spec = find_key(d.kind, role, p.key);
      if (!spec) {
        error(r, line_no, tok.column, eq, unknown_key_message(d.kind, role, p.key));
        continue;
      }
      if (decode(r, spec, p)) d.params.push_back(std::move(p));
    }
    r.source.directives.push_back(std::move(d));
  }

  // Decodes `p.value` for the given key; reports and returns false on error.
  bool decode(ParseResult& r, const KeySpec* spec, Param& p) {
    Value& v = p.value;
    v.dimension = spec->dimension;
    const std::string_view text = v.text;
    const std::size_t line = v.span.line;
    const std::size_t col = v.span.column;

    if (spec->dimension == Dimension::Word) {
      if (!spec->words.empty() &&
          std::find(spec->words.begin(), spec->words.end(), text) == spec->words.end()) {
        std::string options;
        for (auto w : spec->words) options += (options.empty() ? "" : ", ") + std::string(w);
        error(r, line, col, text.size(), "'" + std::string(text) + "' is not one of: " + options);
        return false;
      }
      if (spec->words.empty() && !is_identifier(text)) {
        error(r, line, col, text.size(), "'" + std::string(text) + "' is not a valid name");
        return false;
      }
      v.word = std::string(text);
      return true;
    }

    if (spec->allow_inf && text == "inf") {
      v.si = std::numeric_limits<double>::infinity();
      return true;
    }

    const std::size_t dots = spec->range ? text.find("..") : std::string_view::npos;
    if (spec->range && dots == std::string_view::npos) {
      error(r, line, col, text.size(), "sweep values are ranges: " + p.key + "=FROM..TO");
      return false;
    }
    const std::string_view lhs = spec->range ? text.substr(0, dots) : text;
    auto first = quantity(r, spec, p.key, lhs, line, col);
    if (!first) return false;
    v.si = *first;
    if (spec->range) {
      auto second = quantity(r, spec, p.key, text.substr(dots + 2), line, col + dots + 2);
      if (!second) return false;
      v.range_to = *second;
      return check_constraint(r, spec, p.key, v.si, line, col, dots) &&
             check_constraint(r, spec, p.key, *second, line, col + dots + 2, text.size() - dots - 2);
    }
    return check_constraint(r, spec, p.key, v.si, line, col, text.size());
  }

  std::optional<double> quantity(ParseResult& r, const KeySpec* spec, const std::string& key, std::string_view s,
                                 std::size_t line, std::size_t col) {
    if (s.empty()) {
      error(r, line, col > 1 ? col - 1 : col, 1, "missing number");
      return std::nullopt;
    }
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    std::string digits;
    long exponent = 0;
    bool any_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
      const char c = s[i];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits += c;
        any_digit = true;
        if (seen_dot) --exponent;
      } else if (c == '.' && !seen_dot) {
        if (i + 1 < s.size() && s[i + 1] == '.') break;
        seen_dot = true;
      } else {
        break;
      }
    }
    if (!any_digit) {
      error(r, line, col, s.size(), "'" + std::string(s) + "' is not a number");
      return std::nullopt;
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E') && i + 1 < s.size() &&
        (std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
         ((s[i + 1] == '+' || s[i + 1] == '-') && i + 2 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 2]))))) {
      long e = 0;
      const char* b = s.data() + i + 1;
      if (*b == '+') ++b;
      auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), e);
      if (ec != std::errc()) {
        error(r, line, col + i, 1, "exponent out of range");
        return std::nullopt;
      }
      exponent += e;
      i = static_cast<std::size_t>(ptr - s.data());
    }

    const std::string_view suffix = s.substr(i);
    const std::size_t suffix_col = col + i;
    if (spec->dimension == Dimension::Number || spec->dimension == Dimension::Integer) {
      if (!suffix.empty()) {
        error(r, line, suffix_col, suffix.size(),
              "'" + key + "' takes " + dimension_hint(spec->dimension) + ", unexpected suffix '" + std::string(suffix) + "'");
        return std::nullopt;
      }
      if (spec->dimension == Dimension::Integer && (seen_dot || exponent != 0 || negative)) {
        error(r, line, col, s.size(), "'" + key + "' takes a whole number");
        return std::nullopt;
      }
    } else {
      if (suffix.empty()) {
        error(r, line, col, s.size(), "'" + key + "' needs a unit: " + dimension_hint(spec->dimension));
        return std::nullopt;
      }
      const Unit* unit = nullptr;
      for (const Unit& u : kUnits)
        if (u.suffix == suffix) unit = &u;
      if (!unit) {
        error(r, line, suffix_col, suffix.size(), "unknown unit '" + std::string(suffix) + "'");
        return std::nullopt;
      }
      if (unit->dimension != spec->dimension) {
        error(r, line, suffix_col, suffix.size(),
              "'" + key + "' takes " + dimension_hint(spec->dimension) + ", not '" + std::string(suffix) + "'");
        return std::nullopt;
      }
      exponent += unit->exponent;
    }
    // One correctly rounded conversion of the exact decimal digits·10^exponent,
    // so 150kHz and 0.15MHz give the same double.
    const std::string literal = digits + "e" + std::to_string(exponent);
    double value = std::strtod(literal.c_str(), nullptr);
    if (!std::isfinite(value)) {
      error(r, line, col, s.size(), "value out of range");
      return std::nullopt;
    }
    return negative ? -value : value;
  }

  bool check_constraint(ParseResult& r, const KeySpec* spec, const std::string& key, double v, std::size_t line,
                        std::size_t col, std::size_t len) {
    switch (spec->constraint) {
      case Constraint::Any:
        return true;
      case Constraint::Positive:
        if (v > 0.0) return true;
        error(r, line, col, len, key + " must be positive");
        return false;
      case Constraint::NonNegative:
        if (v >= 0.0) return true;
        error(r, line, col, len, key + " must be non-negative");
        return false;
      case Constraint::NonZero:
        if (v != 0.0) return true;
        error(r, line, col, len, key + " must be nonzero");
        return false;
    }
    return true;
  }

  static bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
  }

  std::string_view text_;
};

}  // namespace

const Param* Directive::find(std::string_view key) const {
  for (const Param& p : params)
    if (p.key == key) return &p;
  return nullptr;
}

bool ParseResult::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseResult parse(std::string_view text) { return Parser(text).run(); }

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  return std::string(file) + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " +
         (d.severity == Severity::Error ? "error" : "warning") + ": " + d.message;
}

std::string print(const SequenceSource& s) {
  std::string out;
  for (const Directive& d : s.directives) {
    out += directive_keyword(d.kind);
    if (d.subkind) out += " " + d.subkind->text;
    for (const Param& p : d.params) out += " " + p.key + "=" + p.value.text;
    out += "\n";
  }
  return out;
}

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_value(const Value& a, const Value& b) {
  return a.text == b.text && a.dimension == b.dimension && same_double(a.si, b.si) &&
         a.range_to.has_value() == b.range_to.has_value() && (!a.range_to || same_double(*a.range_to, *b.range_to)) &&
         a.word == b.word;
}

}  // namespace

bool structurally_equal(const SequenceSource& a, const SequenceSource& b) {
  if (a.directives.size() != b.directives.size()) return false;
  for (std::size_t i = 0; i < a.directives.size(); ++i) {
    const Directive& x = a.directives[i];
    const Directive& y = b.directives[i];
    if (x.kind != y.kind || x.subkind.has_value() != y.subkind.has_value()) return false;
    if (x.subkind && !same_value(*x.subkind, *y.subkind)) return false;
    if (x.params.size() != y.params.size()) return false;
    for (std::size_t k = 0; k < x.params.size(); ++k)
      if (x.params[k].key != y.params[k].key || !same_value(x.params[k].value, y.params[k].value)) return false;
  }
  return true;
}

}  // namespace echoforge::seq
