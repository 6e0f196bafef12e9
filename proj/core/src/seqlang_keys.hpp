#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "echoforge/seqlang.hpp"

namespace echoforge::seq {

enum class PulseRole { None, Probe, LightShift };
enum class Constraint { Any, Positive, NonNegative, NonZero };

struct KeySpec {
  KeySpec(std::string_view k, Dimension d, Constraint c = Constraint::Any, bool inf = false,
          bool is_range = false, std::vector<std::string_view> w = {})
      : key(k), dimension(d), constraint(c), allow_inf(inf), range(is_range), words(std::move(w)) {}

  std::string_view key;
  Dimension dimension;
  Constraint constraint = Constraint::Any;
  bool allow_inf = false;
  bool range = false;
  std::vector<std::string_view> words;  // allowed words; empty means any identifier
};

inline std::optional<DirectiveKind> directive_kind(std::string_view w) {
  if (w == "medium") return DirectiveKind::Medium;
  if (w == "grid") return DirectiveKind::Grid;
  if (w == "pulse") return DirectiveKind::Pulse;
  if (w == "detect") return DirectiveKind::Detect;
  if (w == "sweep") return DirectiveKind::Sweep;
  return std::nullopt;
}

inline const char* directive_keyword(DirectiveKind k) {
  switch (k) {
    case DirectiveKind::Medium: return "medium";
    case DirectiveKind::Grid: return "grid";
    case DirectiveKind::Pulse: return "pulse";
    case DirectiveKind::Detect: return "detect";
    case DirectiveKind::Sweep: return "sweep";
  }
  return "?";
}

inline const std::vector<KeySpec>& medium_keys() {
  static const std::vector<KeySpec> k{
      {"od", Dimension::Number, Constraint::Positive},
      {"t2", Dimension::Time, Constraint::Positive, true},
      {"inhom", Dimension::Frequency, Constraint::Positive},
      {"length", Dimension::Length, Constraint::Positive},
  };
  return k;
}

inline const std::vector<KeySpec>& grid_keys() {
  static const std::vector<KeySpec> k{
      {"span", Dimension::Frequency, Constraint::Positive},
      {"classes", Dimension::Integer, Constraint::Positive},
      {"spectral", Dimension::Word, Constraint::Any, false, false, {"uniform", "first-order", "exact"}},
      {"slices", Dimension::Integer, Constraint::Positive},
  };
  return k;
}

inline const std::vector<KeySpec>& pulse_keys(PulseRole role) {
  static const std::vector<KeySpec> probe{
      {"t", Dimension::Time},
      {"tau", Dimension::Time, Constraint::Positive},
      {"rabi", Dimension::Frequency, Constraint::NonNegative},
      {"waist", Dimension::Length, Constraint::Positive},
      {"name", Dimension::Word},
  };
  static const std::vector<KeySpec> ls{
      {"t", Dimension::Time},
      {"tau", Dimension::Time, Constraint::Positive},
      {"rabi", Dimension::Frequency, Constraint::NonNegative},
      {"detuning", Dimension::Frequency, Constraint::NonZero},
      {"waist", Dimension::Length, Constraint::Positive},
      {"name", Dimension::Word},
  };
  return role == PulseRole::Probe ? probe : ls;
}

inline const std::vector<KeySpec>& detect_keys() {
  static const std::vector<KeySpec> k{
      {"from", Dimension::Time},
      {"to", Dimension::Time},
      {"step", Dimension::Time, Constraint::Positive},
  };
  return k;
}

// Fields a sweep may drive, `name.field=FROM..TO`.
inline const std::vector<KeySpec>& sweep_fields() {
  static const std::vector<KeySpec> k{
      {"t", Dimension::Time, Constraint::Any, false, true},
      {"tau", Dimension::Time, Constraint::Positive, false, true},
      {"rabi", Dimension::Frequency, Constraint::NonNegative, false, true},
      {"detuning", Dimension::Frequency, Constraint::NonZero, false, true},
      {"waist", Dimension::Length, Constraint::Positive, false, true},
      {"intensity", Dimension::Number, Constraint::NonNegative, false, true},
  };
  return k;
}

inline const KeySpec& sweep_steps_key() {
  static const KeySpec k{"steps", Dimension::Integer, Constraint::Positive};
  return k;
}

inline const KeySpec* find_in(const std::vector<KeySpec>& keys, std::string_view key) {
  for (const KeySpec& k : keys)
    if (k.key == key) return &k;
  return nullptr;
}

inline const KeySpec* find_key(DirectiveKind kind, PulseRole role, std::string_view key) {
  switch (kind) {
    case DirectiveKind::Medium: return find_in(medium_keys(), key);
    case DirectiveKind::Grid: return find_in(grid_keys(), key);
    case DirectiveKind::Pulse: return find_in(pulse_keys(role), key);
    case DirectiveKind::Detect: return find_in(detect_keys(), key);
    case DirectiveKind::Sweep: {
      if (key == "steps") return &sweep_steps_key();
      const std::size_t dot = key.rfind('.');
      if (dot == std::string_view::npos || dot == 0) return nullptr;
      return find_in(sweep_fields(), key.substr(dot + 1));
    }
  }
  return nullptr;
}

inline std::string unknown_key_message(DirectiveKind kind, PulseRole role, const std::string& key) {
  if (kind == DirectiveKind::Sweep)
    return "unknown sweep key '" + key + "' (expected steps or NAME.FIELD with FIELD one of t, tau, rabi, "
           "detuning, waist, intensity)";
  if (kind == DirectiveKind::Pulse && role == PulseRole::Probe && key == "detuning")
    return "probe pulses are resonant and take no detuning";
  const std::vector<KeySpec>* keys = nullptr;
  switch (kind) {
    case DirectiveKind::Medium: keys = &medium_keys(); break;
    case DirectiveKind::Grid: keys = &grid_keys(); break;
    case DirectiveKind::Pulse: keys = &pulse_keys(role); break;
    case DirectiveKind::Detect: keys = &detect_keys(); break;
    case DirectiveKind::Sweep: break;
  }
  std::string options;
  if (keys)
    for (const KeySpec& k : *keys) options += (options.empty() ? "" : ", ") + std::string(k.key);
  return "unknown key '" + key + "' for " + directive_keyword(kind) + " (expected " + options + ")";
}

}  // namespace echoforge::seq
