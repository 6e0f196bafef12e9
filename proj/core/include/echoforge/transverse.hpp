#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "echoforge/core.hpp"

namespace echoforge {

// Radial weight of the detected echo coherence for a probe of 1/e² intensity radius w_p.
//   IntensitySquared: exp(−4r²/w_p²), excitation amplitude ∝ probe intensity,
//                     projected once more onto the probe mode.
//   FieldCubed:       exp(−6r²/w_p²), the E1·E2² scaling.
enum class DetectionProfile { IntensitySquared, FieldCubed };

double detection_weight(double r, double probe_waist, DetectionProfile profile);

/// Composite Gauss–Legendre nodes for ∫ f(r) r dr over [0, r_max]; the weights
/// already contain the factor r.
class RadialGrid {
 public:
  // Dense panels on [0, 6·probe_waist], coarser ones beyond. A zero r_max picks
  // max(3·max(waists), 6·probe_waist).
  static RadialGrid for_waists(double probe_waist, double ls_waist, double r_max = 0.0);
  static RadialGrid uniform_panels(double r_max, std::size_t panels);

  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& weights() const { return weights_; }
  double r_max() const { return r_max_; }

  double integrate(const std::function<double(double)>& f) const;

 private:
  void add_panels(double a, double b, std::size_t panels);

  std::vector<double> radii_;
  std::vector<double> weights_;
  double r_max_ = 0.0;
};

// η = |∫W(r)·e^{iΦ(r)} r dr / ∫W(r) r dr|², clamped to [0, 1].
double modulation_factor(const RadialGrid& grid, double probe_waist, const std::function<double(double)>& phase,
                         DetectionProfile profile = DetectionProfile::IntensitySquared);

// Φ(r) = phi_peak·exp(−2r²/w_LS²).
double echo_modulation_factor(double probe_waist, double ls_waist, double phi_peak,
                              DetectionProfile profile = DetectionProfile::IntensitySquared);

// Φ(r) = Σ_II Φ_k·exp(−2r²/w_LS²) − Σ_I Φ_k·exp(−2r²/w_LS²), with Φ_k signed by Δ_k.
// The first overload takes every waist from the pulses; the second overrides them.
double compensated_modulation(const ValidatedSequence& s,
                              DetectionProfile profile = DetectionProfile::IntensitySquared);
double compensated_modulation(const ValidatedSequence& s, double probe_waist, double ls_waist,
                              DetectionProfile profile = DetectionProfile::IntensitySquared);

}  // namespace echoforge
