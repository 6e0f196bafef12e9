#include "echoforge/transverse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "echoforge/phaseledger.hpp"

namespace echoforge {

namespace {

constexpr std::size_t kOrder = 16;
constexpr std::size_t kDensePanels = 48;
constexpr std::size_t kTailPanels = 24;

struct GaussLegendre {
  std::array<double, kOrder> x{};
  std::array<double, kOrder> w{};

  GaussLegendre() {
    for (std::size_t i = 0; i < kOrder; ++i) {
      double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(kOrder) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (std::size_t k = 2; k <= kOrder; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(kOrder) * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre gl;
  return gl;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(what);
}

}  // namespace

double detection_weight(double r, double probe_waist, DetectionProfile profile) {
  const double x = r * r / (probe_waist * probe_waist);
  return profile == DetectionProfile::IntensitySquared ? std::exp(-4.0 * x) : std::exp(-6.0 * x);
}

void RadialGrid::add_panels(double a, double b, std::size_t panels) {
  const auto& gl = gauss_legendre();
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    for (std::size_t i = 0; i < kOrder; ++i) {
      const double r = lo + 0.5 * width * (gl.x[i] + 1.0);
      radii_.push_back(r);
      weights_.push_back(0.5 * width * gl.w[i] * r);
    }
  }
}

RadialGrid RadialGrid::for_waists(double probe_waist, double ls_waist, double r_max) {
  require_positive(probe_waist, "probe waist must be positive");
  if (!std::isinf(ls_waist)) require_positive(ls_waist, "light-shift waist must be positive");
  const double dense = 6.0 * probe_waist;
  if (r_max == 0.0) r_max = std::max(dense, std::isinf(ls_waist) ? 0.0 : 3.0 * std::max(probe_waist, ls_waist));
  require_positive(r_max, "r_max must be positive");
  RadialGrid g;
  g.r_max_ = r_max;
  if (r_max <= dense) {
    g.add_panels(0.0, r_max, kDensePanels);
  } else {
    g.add_panels(0.0, dense, kDensePanels);
    g.add_panels(dense, r_max, kTailPanels);
  }
  return g;
}

RadialGrid RadialGrid::uniform_panels(double r_max, std::size_t panels) {
  require_positive(r_max, "r_max must be positive");
  if (panels == 0) throw std::invalid_argument("radial grid needs at least one panel");
  RadialGrid g;
  g.r_max_ = r_max;
  g.add_panels(0.0, r_max, panels);
  return g;
}

double RadialGrid::integrate(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < radii_.size(); ++k) sum += weights_[k] * f(radii_[k]);
  return sum;
}

double modulation_factor(const RadialGrid& grid, double probe_waist, const std::function<double(double)>& phase,
                         DetectionProfile profile) {
  require_positive(probe_waist, "probe waist must be positive");
  // Phases are taken relative to the axis so a constant Φ(r) gives exactly 1.
  const double phi0 = phase(0.0);
  std::complex<double> num{0.0, 0.0};
  double den = 0.0;
  for (std::size_t k = 0; k < grid.radii().size(); ++k) {
    const double r = grid.radii()[k];
    const double w = grid.weights()[k] * detection_weight(r, probe_waist, profile);
    const double d = phase(r) - phi0;
    num += w * std::polar(1.0, d);
    den += w;
  }
  const double eta = std::norm(num) / (den * den);
  return std::clamp(eta, 0.0, 1.0);
}

double echo_modulation_factor(double probe_waist, double ls_waist, double phi_peak, DetectionProfile profile) {
  const RadialGrid grid = RadialGrid::for_waists(probe_waist, ls_waist);
  return modulation_factor(grid, probe_waist, [&](double r) {
    return phi_peak * std::exp(-2.0 * r * r / (ls_waist * ls_waist));
  }, profile);
}

namespace {

double compensated_impl(const ValidatedSequence& s, double probe_waist, const std::vector<double>& ls_waists,
                        DetectionProfile profile) {
  struct Term {
    double phase;
    double waist;
  };
  std::vector<Term> terms;
  double widest = 0.0;
  const auto ls = s.light_shift_indices();
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const std::size_t i = ls[k];
    const double phi = light_shift_phase(s.pulses()[i]);
    terms.push_back({*s.region(i) == Region::I ? -phi : phi, ls_waists[k]});
    widest = std::max(widest, ls_waists[k]);
  }
  const RadialGrid grid = RadialGrid::for_waists(probe_waist, widest > 0.0 ? widest : probe_waist);
  return modulation_factor(grid, probe_waist, [&](double r) {
    double phi = 0.0;
    for (const Term& t : terms) phi += t.phase * std::exp(-2.0 * r * r / (t.waist * t.waist));
    return phi;
  }, profile);
}

}  // namespace

double compensated_modulation(const ValidatedSequence& s, DetectionProfile profile) {
  std::vector<double> waists;
  for (std::size_t i : s.light_shift_indices()) waists.push_back(s.pulses()[i].waist());
  return compensated_impl(s, s.pulses()[s.probe_indices().front()].waist(), waists, profile);
}

double compensated_modulation(const ValidatedSequence& s, double probe_waist, double ls_waist,
                              DetectionProfile profile) {
  return compensated_impl(s, probe_waist, std::vector<double>(s.light_shift_indices().size(), ls_waist), profile);
}

}  // namespace echoforge
