#pragma once

#include <cmath>
#include <span>

namespace entroscope {

// Shannon entropy in nats of a probability vector; zero entries contribute 0.
inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace entroscope
