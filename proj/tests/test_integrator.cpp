#include <gtest/gtest.h>

#include <cmath>

#include "echoforge/integrator.hpp"

using namespace echoforge;

namespace {
auto no_op = [](double, const auto&, const auto&) {};
}

TEST(DormandPrince, ExponentialDecay) {
  DormandPrince<1> dp({1e-12, 1e-14});
  std::array<double, 1> y{1.0};
  double h = 0.0;
  dp.integrate([](double, const auto& y, auto& dy) { dy[0] = -2.0 * y[0]; }, y, 0.0, 3.0, h, no_op);
  EXPECT_NEAR(y[0], std::exp(-6.0), 1e-12);
}

TEST(DormandPrince, HarmonicOscillatorOverManyPeriods) {
  DormandPrince<2> dp({1e-11, 1e-13});
  std::array<double, 2> y{1.0, 0.0};
  double h = 0.0;
  const double w = 2 * M_PI * 3.0;
  dp.integrate(
      [w](double, const auto& y, auto& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
      },
      y, 0.0, 10.0, h, no_op);
  EXPECT_NEAR(y[0], std::cos(w * 10.0), 1e-7);
  EXPECT_NEAR(y[1], -w * std::sin(w * 10.0), 1e-6 * w);
}

TEST(DormandPrince, EndsExactlyAtT1AndHonorsHmax) {
  StepControl sc{1e-8, 1e-10};
  sc.h_max = 0.01;
  DormandPrince<1> dp(sc);
  std::array<double, 1> y{0.0};
  double h = 0.0, last_t = 0.0, max_step = 0.0, prev = 0.0;
  std::size_t n = dp.integrate([](double, const auto&, auto& dy) { dy[0] = 1.0; }, y, 0.0, 1.0, h,
                               [&](double t, const auto&, const auto&) {
                                 max_step = std::max(max_step, t - prev);
                                 prev = last_t = t;
                               });
  EXPECT_EQ(last_t, 1.0);
  EXPECT_LE(max_step, 0.01 * (1 + 1e-3));
  EXPECT_NEAR(y[0], 1.0, 1e-14);
  EXPECT_GE(n, 100u);
}

TEST(DormandPrince, NonFiniteStateThrows) {
  DormandPrince<1> dp({1e-10, 1e-12});
  std::array<double, 1> y{1.0};
  double h = 0.0;
  EXPECT_THROW(dp.integrate([](double, const auto& y, auto& dy) { dy[0] = y[0] * y[0]; }, y, 0.0, 2.0, h, no_op),
               NonconvergedIntegration);
}

TEST(DormandPrince, OnStepMayAbort) {
  DormandPrince<1> dp({1e-10, 1e-12});
  std::array<double, 1> y{1.0};
  double h = 0.0;
  EXPECT_THROW(dp.integrate([](double, const auto&, auto& dy) { dy[0] = 1.0; }, y, 0.0, 1.0, h,
                            [](double t, const auto&, const auto&) {
                              if (t > 0.5) throw std::runtime_error("stop");
                            }),
               std::runtime_error);
}
