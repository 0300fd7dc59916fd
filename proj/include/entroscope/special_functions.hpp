#pragma once

namespace entroscope {

// Digamma ψ(x) for x > 0. Throws std::domain_error otherwise.
double digamma(double x);

// Trigamma ψ₁(x) = ψ'(x) for x > 0. Throws std::domain_error otherwise.
double trigamma(double x);

}  // namespace entroscope
