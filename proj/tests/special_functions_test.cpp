#include <gtest/gtest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "entroscope/special_functions.hpp"
#include "oracles.hpp"

using entroscope::digamma;
using entroscope::trigamma;

namespace {

constexpr double kEuler = std::numbers::egamma;
constexpr double kPi = std::numbers::pi;

// Absolute 1e-10 where representable; relative 1e-13 covers magnitudes where
// one ulp already exceeds 1e-10.
::testing::AssertionResult close(double got, double want) {
  const double tol = std::max(1e-10, 1e-13 * std::abs(want));
  if (std::abs(got - want) <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "got " << got << " want " << want << " diff "
                                       << got - want;
}

}  // namespace

TEST(SpecialFunctions, ReferenceIdentities) {
  EXPECT_NEAR(digamma(1.0), -kEuler, 1e-10);
  EXPECT_NEAR(digamma(0.5), -kEuler - 2.0 * std::log(2.0), 1e-10);
  EXPECT_NEAR(trigamma(1.0), kPi * kPi / 6.0, 1e-10);
  EXPECT_NEAR(trigamma(0.5), kPi * kPi / 2.0, 1e-10);
  EXPECT_NEAR(digamma(2.0), 1.0 - kEuler, 1e-10);
  EXPECT_NEAR(trigamma(2.0), kPi * kPi / 6.0 - 1.0, 1e-10);
}

TEST(SpecialFunctions, Recurrences) {
  for (double x : {1e-3, 0.1, 0.37, 1.0, 2.5, 7.9, 9.99, 10.0, 10.01, 42.0, 1e3, 1e6}) {
    EXPECT_TRUE(close(digamma(x + 1.0), digamma(x) + 1.0 / x)) << "x=" << x;
    EXPECT_TRUE(close(trigamma(x + 1.0), trigamma(x) - 1.0 / (x * x))) << "x=" << x;
  }
}

TEST(SpecialFunctions, MatchesIndependentReferences) {
  for (double x = 0.01; x < 200.0; x *= 1.173) {
    const double d_ref = static_cast<double>(oracle::digamma_reference(x));
    const double t_ref = static_cast<double>(oracle::trigamma_reference(x));
    EXPECT_TRUE(close(digamma(x), d_ref)) << "x=" << x;
    EXPECT_TRUE(close(trigamma(x), t_ref)) << "x=" << x;
    EXPECT_TRUE(close(digamma(x), boost::math::digamma(x))) << "x=" << x;
    EXPECT_TRUE(close(trigamma(x), boost::math::trigamma(x))) << "x=" << x;
  }
}

TEST(SpecialFunctions, LargeArguments) {
  for (double x : {1e4, 1e8, 1e12}) {
    EXPECT_TRUE(close(digamma(x), boost::math::digamma(x)));
    EXPECT_NEAR(trigamma(x) * x, 1.0, 1e-3);
  }
}

TEST(SpecialFunctions, DomainErrors) {
  for (double x : {0.0, -1.0, -0.5, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::quiet_NaN()}) {
    EXPECT_THROW(digamma(x), std::domain_error);
    EXPECT_THROW(trigamma(x), std::domain_error);
  }
}
