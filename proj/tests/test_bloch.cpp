#include <gtest/gtest.h>

#include <cmath>

#include "echoforge/bloch.hpp"

using namespace echoforge;

namespace {

constexpr double us = kMicrosecond;
const double kTruncatedArea = std::erf(2.0);  // area fraction inside ±4τ

Pulse probe(double t, double area, double tau = 1 * us) {
  return Pulse::probe(t, tau, AngularFrequency::radians_per_second(area / (2 * std::sqrt(kPi) * tau)), 50e-6);
}

Pulse ls(double t, double delta_mhz = 1.5, double rabi_khz = 330) {
  return Pulse::light_shift(t, 3 * us, AngularFrequency::from_khz(rabi_khz), AngularFrequency::from_mhz(delta_mhz),
                            110e-6);
}

ValidatedSequence seq(double tau_probe, std::vector<Pulse> extra = {}) {
  Sequence s{{probe(0, kPi / 2, tau_probe), probe(35 * us, kPi, tau_probe)}, 35 * us, {69 * us, 71 * us}};
  for (auto& p : extra) s.pulses.push_back(p);
  return validate_sequence(s);
}

const Medium kMedium(3.5, INFINITY, AngularFrequency::from_hz(1e9), 2.5e-3);

}  // namespace

TEST(Bloch, ResonantClassFollowsRabiFormula) {
  const SpectralGrid one({0.0}, {1.0});
  const BlochTrajectory tr = integrate_sequence(seq(1 * us), kMedium, one);
  ASSERT_EQ(tr.snapshots.size(), 2u);
  const BlochVector a = tr.snapshots[0].classes[0];
  const double A1 = kPi / 2 * kTruncatedArea;
  EXPECT_NEAR(a.w, -std::cos(A1), 1e-8);
  EXPECT_NEAR(std::hypot(a.u, a.v), std::sin(A1), 1e-8);
  const BlochVector b = tr.snapshots[1].classes[0];
  EXPECT_NEAR(b.w, -std::cos(A1 + kPi * kTruncatedArea), 1e-8);
  EXPECT_LT(tr.max_norm_error, 1e-8);
}

TEST(Bloch, DetunedClassPrecessesFreely) {
  // An impulsive π/2 leaves coherence that rotates at δ until the second probe.
  const double d = 2 * kPi * 100e3;
  const SpectralGrid one({d}, {1.0});
  Sequence s{{probe(0, kPi / 2, 5e-9), probe(35 * us, kPi, 5e-9)}, 35 * us, {69 * us, 71 * us}};
  const BlochTrajectory tr = integrate_sequence(validate_sequence(s), kMedium, one);
  const auto c0 = tr.snapshots[0].classes[0].coherence();
  const auto c_end = tr.snapshots[1].classes[0].coherence();
  ASSERT_GT(std::abs(c0), 0.99);
  // After the π pulse the coherence is conjugated; between samples it again rotates at δ.
  const std::size_t i = 100, j = 150;
  const auto ratio = tr.polarization[j] / tr.polarization[i];
  EXPECT_NEAR(std::arg(ratio), std::remainder(d * (tr.times[j] - tr.times[i]), 2 * kPi), 1e-6);
  EXPECT_NEAR(std::abs(c_end), std::abs(c0), 1e-4);
}

TEST(Bloch, T2DecayOfCoherence) {
  const Medium m(3.5, 20 * us, AngularFrequency::from_hz(1e9), 2.5e-3);
  const SpectralGrid one({0.0}, {1.0});
  const BlochTrajectory tr = integrate_sequence(seq(5e-9), m, one);
  const double r = std::abs(tr.polarization[200]) / std::abs(tr.polarization[0]);
  EXPECT_NEAR(r, std::exp(-(tr.times[200] - tr.times[0]) / (20 * us)), 1e-7);
}

TEST(Bloch, SingleClassPhaseEqualsLedgerShift) {
  const Pulse p = ls(17.5 * us);
  const double trunc = std::erf(4 / std::sqrt(2.0));
  BlochOptions o;
  o.spectral = SpectralMode::Uniform;
  EXPECT_NEAR(single_class_phase(p, 0.0, LightShiftTreatment::EffectiveShift, o), light_shift_phase(p) * trunc,
              1e-8);
  o.spectral = SpectralMode::Exact;
  const double d = 2 * kPi * 200e3;
  EXPECT_NEAR(single_class_phase(p, d, LightShiftTreatment::EffectiveShift, o),
              spectral_phase(p, AngularFrequency::radians_per_second(d), SpectralMode::Exact) * trunc, 1e-8);
}

TEST(Bloch, TwoToneApproachesEffectiveShiftFarDetuned) {
  const Pulse p = ls(17.5 * us, 8 * 0.33);
  const double es = single_class_phase(p, 0.0, LightShiftTreatment::EffectiveShift);
  const double tt = single_class_phase(p, 0.0, LightShiftTreatment::TwoTone);
  EXPECT_LT(std::abs(tt - es) / std::abs(es), 0.01);
}

TEST(Bloch, ShiftCoefficientModes) {
  const Pulse p = ls(17.5 * us);
  const double D = p.detuning().rad_per_s();
  EXPECT_DOUBLE_EQ(shift_coefficient(p, 123.0, SpectralMode::Uniform), 1 / D);
  EXPECT_NEAR(shift_coefficient(p, 0.1 * D, SpectralMode::FirstOrder), 0.9 / D, 1e-22);
  EXPECT_NEAR(shift_coefficient(p, 0.1 * D, SpectralMode::Exact), 1 / (1.1 * D), 1e-22);
  // Clamped next to the light-shift resonance.
  EXPECT_TRUE(std::isfinite(shift_coefficient(p, -D, SpectralMode::Exact)));
  EXPECT_LE(std::abs(shift_coefficient(p, -D, SpectralMode::Exact)), 1 / p.omega0().rad_per_s() * (1 + 1e-12));
}

TEST(Bloch, BareEchoAtTwiceT12) {
  BlochOptions o;
  const SpectralGrid g = SpectralGrid::flat(AngularFrequency::from_mhz(2), 801);
  const EchoResult e = detect_echo(integrate_sequence(seq(5e-9), kMedium, g, o), {69 * us, 71 * us});
  EXPECT_NEAR(e.peak_time, 70 * us, 0.01 * us);
}

TEST(Bloch, ThreadCountDoesNotChangeBits) {
  const SpectralGrid g = SpectralGrid::flat(AngularFrequency::from_mhz(1), 301);
  BlochOptions o;
  o.chunk_size = 16;
  o.threads = 1;
  const BlochTrajectory a = integrate_sequence(seq(1 * us, {ls(17.5 * us)}), kMedium, g, o);
  o.threads = 3;
  const BlochTrajectory b = integrate_sequence(seq(1 * us, {ls(17.5 * us)}), kMedium, g, o);
  ASSERT_EQ(a.polarization.size(), b.polarization.size());
  for (std::size_t i = 0; i < a.polarization.size(); ++i) ASSERT_EQ(a.polarization[i], b.polarization[i]);
  EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Bloch, NormGuardRejectsLooseSteps) {
  const SpectralGrid one({0.0}, {1.0});
  BlochOptions o;
  o.rtol = 1e-2;
  o.atol = 1e-2;
  o.dt_max = 1e-6;
  o.norm_tolerance = 1e-14;
  EXPECT_THROW(integrate_sequence(seq(1 * us), kMedium, one, o), StepTooLarge);
}

TEST(DetectPeak, RecoversGaussianCenterBetweenSamples) {
  std::vector<double> t;
  std::vector<std::complex<double>> f;
  const double c = 70.0034 * us, w = 0.3 * us;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(69 * us + k * 0.01 * us);
    f.emplace_back(std::exp(-std::pow((t.back() - c) / w, 2)), 0.0);
  }
  const EchoResult e = detect_peak(t, f);
  EXPECT_NEAR(e.peak_time, c, 1e-4 * us);
  EXPECT_NEAR(e.peak_intensity, 1.0, 1e-5);
  EXPECT_THROW(detect_peak(t, std::vector<std::complex<double>>(t.size())), NoPeak);
}
