#include "entroscope/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace entroscope {

namespace {

// Below this the argument is shifted upward with the recurrence before the
// asymptotic series is applied; truncation error there is < 1e-15.
constexpr double kAsymptoticThreshold = 10.0;

void check_domain(double x, const char* name) {
  if (!(x > 0.0) || std::isinf(x))
    throw std::domain_error(std::string(name) + ": argument must be positive and finite, got " +
                            std::to_string(x));
}

}  // namespace

double digamma(double x) {
  check_domain(x, "digamma");
  double shift = 0.0;
  // ψ(x) = ψ(x + 1) − 1/x
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // ln x − 1/(2x) − Σ B_{2k} / (2k x^{2k})
  const double series =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  check_domain(x, "trigamma");
  double shift = 0.0;
  // ψ₁(x) = ψ₁(x + 1) + 1/x²
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
  const double series =
      inv * inv2 * (1.0 / 6 -
      inv2 * (1.0 / 30 -
      inv2 * (1.0 / 42 -
      inv2 * (1.0 / 30 -
      inv2 * (5.0 / 66 -
      inv2 * (691.0 / 2730 -
      inv2 * (7.0 / 6)))))));
  return shift + inv + 0.5 * inv2 + series;
}

}  // namespace entroscope
