#pragma once

#include <compare>
#include <numbers>

namespace echoforge {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Time and length are plain doubles in SI units (seconds, meters) throughout.
inline constexpr double kMicrosecond = 1e-6;
inline constexpr double kMicrometer = 1e-6;

/// Angular frequency in rad/s.
///
/// Every Rabi frequency, detuning and spectral class offset is stored as an
/// angular frequency. User-facing values arrive as linear frequencies
/// (Hz/kHz/MHz) and are converted with the `from_*` factories, which apply the
/// 2π exactly once.
class AngularFrequency {
 public:
  constexpr AngularFrequency() = default;

  static AngularFrequency from_hz(double hz);
  static AngularFrequency from_khz(double khz) { return from_hz(khz * 1e3); }
  static AngularFrequency from_mhz(double mhz) { return from_hz(mhz * 1e6); }

  // For values that are already angular (computed quantities, internal grids).
  static AngularFrequency radians_per_second(double value);

  constexpr double rad_per_s() const { return value_; }
  constexpr double hz() const { return value_ / kTwoPi; }

  constexpr AngularFrequency operator-() const { return AngularFrequency(-value_); }
  constexpr AngularFrequency operator+(AngularFrequency o) const { return AngularFrequency(value_ + o.value_); }
  constexpr AngularFrequency operator-(AngularFrequency o) const { return AngularFrequency(value_ - o.value_); }
  constexpr AngularFrequency operator*(double s) const { return AngularFrequency(value_ * s); }
  constexpr AngularFrequency operator/(double s) const { return AngularFrequency(value_ / s); }

  constexpr auto operator<=>(const AngularFrequency&) const = default;

 private:
  constexpr explicit AngularFrequency(double v) : value_(v) {}
  double value_ = 0.0;
};

}  // namespace echoforge
