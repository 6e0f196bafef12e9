#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <cstdio>

namespace echoforge {

class NonconvergedIntegration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = 0.0;  // 0: unbounded
  double h_min = 1e-16;
  std::size_t max_steps = 50'000'000;
};

/// Dormand–Prince 5(4) with FSAL and a PI step-size controller.
///
/// `f(t, y, dydt)` evaluates the right-hand side; `on_step(t, y_old, y_new)` is
/// called after every accepted step and may throw to abort.
/// Integrates from t0 to t1 (t1 > t0) in place. `h` carries the step size
/// between calls; pass 0 to let the first step be chosen automatically.
template <std::size_t N>
class DormandPrince {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince(StepControl control) : c_(control) {}

  template <class F, class OnStep>
  std::size_t integrate(F&& f, State& y, double t0, double t1, double& h, OnStep&& on_step) const {
    double t = t0;
    State k1, k2, k3, k4, k5, k6, k7, tmp, y5;
    f(t, y, k1);
    if (!(h > 0.0)) h = initial_step(y, k1, t1 - t0);
    double err_prev = 1e-4;
    std::size_t accepted = 0;
    std::size_t attempts = 0;
    while (t < t1) {
      if (++attempts > c_.max_steps) throw NonconvergedIntegration("step budget exhausted");
      if (c_.h_max > 0.0) h = std::min(h, c_.h_max);
      if (h < c_.h_min) throw underflow(t, h);
      // A step that would leave a sliver shorter than 1e-3·h is stretched to t1.
      const bool last = t + h >= t1 || t1 - (t + h) < 1e-3 * h;
      const double hs = last ? t1 - t : h;

      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a21 * k1[i]);
      f(t + c2 * hs, tmp, k2);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      f(t + c3 * hs, tmp, k3);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      f(t + c4 * hs, tmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      f(t + c5 * hs, tmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      const double t_new = last ? t1 : t + hs;
      f(t_new, tmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      f(t_new, y5, k7);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = c_.atol + c_.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!std::isfinite(err)) throw NonconvergedIntegration("non-finite state in step");

      if (err <= 1.0) {
        on_step(t_new, y, y5);
        y = y5;
        k1 = k7;
        t = t_new;
        ++accepted;
        const double fac = err == 0.0 ? 5.0
                                      : 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        err_prev = std::max(err, 1e-4);
        // A step shortened to land on t1 says nothing about the next step size.
        if (hs >= h) h *= std::clamp(fac, 0.2, 5.0);
      } else {
        h = hs * std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
      }
    }
    return accepted;
  }

 private:
  static NonconvergedIntegration underflow(double t, double h) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "step size underflow at t=%.9e s (h=%.3e s)", t, h);
    return NonconvergedIntegration(buf);
  }

  double initial_step(const State& y, const State& dy, double span) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = c_.atol + c_.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(dy[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, span);
    if (c_.h_max > 0.0) h = std::min(h, c_.h_max);
    return std::max(h, c_.h_min);
  }

  StepControl c_;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace echoforge
