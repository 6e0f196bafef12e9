#include "echoforge/units.hpp"

#include <cmath>
#include <stdexcept>

namespace echoforge {

AngularFrequency AngularFrequency::from_hz(double hz) {
  if (!std::isfinite(hz)) throw std::invalid_argument("frequency must be finite");
  return AngularFrequency(hz * kTwoPi);
}

AngularFrequency AngularFrequency::radians_per_second(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("angular frequency must be finite");
  return AngularFrequency(value);
}

}  // namespace echoforge
