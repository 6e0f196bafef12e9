#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "echoforge/phaseledger.hpp"
#include "echoforge/transverse.hpp"

using namespace echoforge;

namespace {

constexpr double um = kMicrometer;

// Brute-force η on an n×n Cartesian grid over ±4 w_p.
double cartesian_eta(double wp, double wls, double phi, DetectionProfile profile, int n = 2001) {
  const double half = 4.0 * wp, h = 2.0 * half / (n - 1);
  const double a = profile == DetectionProfile::IntensitySquared ? 4.0 : 6.0;
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -half + i * h;
    for (int j = 0; j < n; ++j) {
      const double y = -half + j * h, r2 = x * x + y * y;
      const double w = std::exp(-a * r2 / (wp * wp));
      num += w * std::polar(1.0, phi * std::exp(-2.0 * r2 / (wls * wls)));
      den += w;
    }
  }
  return std::norm(num / den);
}

}  // namespace

TEST(Transverse, MatchesCartesianOracle) {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> wp(20, 80), wls(30, 200), phi(0, 2 * kPi);
  for (int k = 0; k < 5; ++k) {
    const double a = wp(rng) * um, b = wls(rng) * um, p = phi(rng);
    for (auto prof : {DetectionProfile::IntensitySquared, DetectionProfile::FieldCubed})
      EXPECT_NEAR(echo_modulation_factor(a, b, p, prof), cartesian_eta(a, b, p, prof, 801), 1e-4)
          << a << " " << b << " " << p;
  }
}

TEST(Transverse, Identities) {
  EXPECT_EQ(echo_modulation_factor(50 * um, 110 * um, 0.0), 1.0);
  const RadialGrid g = RadialGrid::for_waists(50 * um, 110 * um);
  EXPECT_NEAR(modulation_factor(g, 50 * um, [](double) { return 1.234; }), 1.0, 1e-10);
  // ∫ exp(-4r²/w²) r dr = w²/8
  EXPECT_NEAR(g.integrate([](double r) { return std::exp(-4 * r * r / (2500 * um * um)); }), 2500 * um * um / 8,
              1e-12 * 2500 * um * um);
}

TEST(Transverse, ErbiumBeamsGiveModestReduction) {
  const double eta = echo_modulation_factor(50 * um, 110 * um, 1.092 * kPi);
  EXPECT_GT(eta, 0.85);
  EXPECT_LT(eta, 0.95);
}

TEST(Transverse, MonotoneInPhaseUpToPi) {
  double prev = 1.0;
  for (double p = 0.1; p <= kPi; p += 0.1) {
    const double eta = echo_modulation_factor(50 * um, 110 * um, p);
    EXPECT_LT(eta, prev);
    prev = eta;
  }
}

TEST(Transverse, WideControlBeamIsUniform) {
  EXPECT_NEAR(echo_modulation_factor(50 * um, 50000 * um, 2.0), 1.0, 1e-5);
}

TEST(Transverse, CompensatedSequences) {
  auto probe = [](double t) { return Pulse::probe(t, 1e-6, AngularFrequency::from_khz(150), 50 * um); };
  auto ls = [](double t, double d) {
    return Pulse::light_shift(t, 3e-6, AngularFrequency::from_khz(330), AngularFrequency::from_mhz(d), 110 * um);
  };
  auto mk = [&](std::vector<Pulse> extra) {
    Sequence s{{probe(0), probe(35e-6)}, 35e-6, {60e-6, 80e-6}};
    for (auto& p : extra) s.pulses.push_back(p);
    return validate_sequence(s);
  };
  const double phi = light_shift_phase(ls(17.5e-6, 1.5));
  EXPECT_EQ(compensated_modulation(mk({ls(17.5e-6, 1.5), ls(52.5e-6, 1.5)})), 1.0);
  EXPECT_EQ(compensated_modulation(mk({ls(14e-6, 1.5), ls(21e-6, -1.5)})), 1.0);
  EXPECT_NEAR(compensated_modulation(mk({ls(14e-6, 1.5), ls(21e-6, 1.5)})),
              echo_modulation_factor(50 * um, 110 * um, 2 * phi), 1e-14);
  EXPECT_NEAR(compensated_modulation(mk({ls(17.5e-6, 1.5)})), echo_modulation_factor(50 * um, 110 * um, phi), 1e-14);
  EXPECT_NEAR(compensated_modulation(mk({ls(17.5e-6, 1.5)}), 50 * um, 1e3),
              1.0, 1e-9);
}

TEST(Transverse, RejectsBadInput) {
  EXPECT_THROW(echo_modulation_factor(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(RadialGrid::uniform_panels(1.0, 0), std::invalid_argument);
}
