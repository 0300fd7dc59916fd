#include "entroscope/dirichlet_moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "entroscope/special_functions.hpp"

namespace entroscope {

namespace {

constexpr double kVarianceClamp = 1e-12;

void check_index(const DirichletParams& p, std::size_t i) {
  if (i >= p.size()) throw std::out_of_range("Dirichlet component index out of range");
}

// Rounding in E[H²] − E[H]² can land a hair below zero.
double clamp_variance(double v) { return v < kVarianceClamp ? std::max(v, 0.0) : v; }

}  // namespace

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw std::invalid_argument("Dirichlet needs at least one component");
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("Dirichlet components must be positive and finite");
  }
  alpha0_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

DirichletParams DirichletParams::posterior(double prior_alpha,
                                           std::span<const std::size_t> counts,
                                           std::size_t support) {
  if (!(prior_alpha > 0.0) || !std::isfinite(prior_alpha))
    throw std::invalid_argument("Dirichlet prior concentration must be positive and finite");
  if (support < counts.size())
    throw std::invalid_argument("support smaller than the number of observed meanings");
  std::vector<double> alpha(support, prior_alpha);
  for (std::size_t j = 0; j < counts.size(); ++j)
    alpha[j] += static_cast<double>(counts[j]);
  return DirichletParams(std::move(alpha));
}

DirichletParams DirichletParams::shifted(std::size_t i, std::size_t j) const {
  check_index(*this, i);
  check_index(*this, j);
  std::vector<double> a = alpha_;
  a[i] += 1.0;
  a[j] += 1.0;
  return DirichletParams(std::move(a));
}

double entropy_mean(const DirichletParams& params) {
  if (params.size() == 1) return 0.0;
  const double a0 = params.alpha0();
  double weighted = 0.0;
  for (double a : params.alpha()) weighted += a * digamma(a + 1.0);
  return digamma(a0 + 1.0) - weighted / a0;
}

double log_moment_squared(const DirichletParams& params, std::size_t i) {
  check_index(params, i);
  const double a0 = params.alpha0();
  const double d = digamma(params[i]) - digamma(a0);
  return trigamma(params[i]) - trigamma(a0) + d * d;
}

double log_cross_moment(const DirichletParams& params, std::size_t i, std::size_t j) {
  check_index(params, i);
  check_index(params, j);
  if (i == j)
    throw std::invalid_argument("log_cross_moment needs i != j; use log_moment_squared");
  const double psi0 = digamma(params.alpha0());
  return -trigamma(params.alpha0()) +
         (digamma(params[i]) - psi0) * (digamma(params[j]) - psi0);
}

double entropy_second_moment(const DirichletParams& params) {
  if (params.size() == 1) return 0.0;
  const double a0 = params.alpha0();
  const double psi_a0_2 = digamma(a0 + 2.0);
  const double tri_a0_2 = trigamma(a0 + 2.0);

  // Diagonal: α_i(α_i+1){ψ₁(α_i+2) − ψ₁(α₀+2) + (ψ(α_i+2) − ψ(α₀+2))²}
  // Off-diagonal: Σ_{i≠j} α_iα_j{−ψ₁(α₀+2) + d_i d_j}, d_i = ψ(α_i+1) − ψ(α₀+2),
  // folded into sums over i to stay O(K).
  double diagonal = 0.0;
  double sum_a = 0.0, sum_a2 = 0.0, sum_ad = 0.0, sum_a2d2 = 0.0;
  for (double a : params.alpha()) {
    const double e = digamma(a + 2.0) - psi_a0_2;
    diagonal += a * (a + 1.0) * (trigamma(a + 2.0) - tri_a0_2 + e * e);
    const double d = digamma(a + 1.0) - psi_a0_2;
    sum_a += a;
    sum_a2 += a * a;
    sum_ad += a * d;
    sum_a2d2 += a * a * d * d;
  }
  const double off_diagonal =
      -tri_a0_2 * (sum_a * sum_a - sum_a2) + (sum_ad * sum_ad - sum_a2d2);
  return (diagonal + off_diagonal) / (a0 * (a0 + 1.0));
}

double entropy_second_moment_from_lemmas(const DirichletParams& params) {
  const std::size_t k = params.size();
  const double a0 = params.alpha0();
  const double norm = a0 * (a0 + 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    // E[b_i² (log b_i)²] = E[b_i²] · E[(log b_i)²] under Dir(α + 2e_i)
    const double e_bi2 = params[i] * (params[i] + 1.0) / norm;
    total += e_bi2 * log_moment_squared(params.shifted(i, i), i);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      // E[b_i b_j log b_i log b_j] = E[b_i b_j] · E[log b_i log b_j] under Dir(α + e_i + e_j)
      const double e_bibj = params[i] * params[j] / norm;
      total += e_bibj * log_cross_moment(params.shifted(i, j), i, j);
    }
  }
  return total;
}

EntropyMoments entropy_moments(const DirichletParams& params) {
  EntropyMoments m;
  m.mean = entropy_mean(params);
  m.second_moment = entropy_second_moment(params);
  m.variance = clamp_variance(m.second_moment - m.mean * m.mean);
  return m;
}

double entropy_variance(const DirichletParams& params) {
  return entropy_moments(params).variance;
}

}  // namespace entroscope
