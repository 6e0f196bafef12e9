#pragma once

#include <cmath>

#include "echoforge/core.hpp"

namespace bench {

using namespace echoforge;

inline ValidatedSequence fig2(bool with_light_shift = true) {
  const auto probe = [](double t) { return Pulse::probe(t, 1e-6, AngularFrequency::from_khz(150), 50e-6); };
  Sequence s{{probe(0), probe(35e-6)}, 35e-6, {60e-6, 80e-6}};
  if (with_light_shift)
    s.pulses.push_back(Pulse::light_shift(17.5e-6, 3e-6, AngularFrequency::from_khz(330),
                                          AngularFrequency::from_mhz(1.5), 110e-6));
  return validate_sequence(s);
}

inline const Medium& erbium() {
  static const Medium m(3.5, 130e-6, AngularFrequency::from_hz(1e9), 2.5e-3);
  return m;
}

}  // namespace bench
