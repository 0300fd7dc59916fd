#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace entroscope {

/// Concentration parameters of a Dirichlet belief over K meanings.
class DirichletParams {
 public:
  // Throws std::invalid_argument unless K >= 1 and every component is > 0.
  explicit DirichletParams(std::vector<double> alpha);

  // Posterior under a symmetric prior: α + c_j for j < counts.size(), α for
  // the remaining K − counts.size() components.
  static DirichletParams posterior(double prior_alpha,
                                   std::span<const std::size_t> counts,
                                   std::size_t support);

  std::span<const double> alpha() const { return alpha_; }
  double operator[](std::size_t i) const { return alpha_[i]; }
  double alpha0() const { return alpha0_; }
  std::size_t size() const { return alpha_.size(); }

  // Parameters shifted by the standard basis vectors e_i + e_j.
  DirichletParams shifted(std::size_t i, std::size_t j) const;

 private:
  std::vector<double> alpha_;
  double alpha0_ = 0.0;
};

struct EntropyMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

// E[H(b)], b ~ Dir(α):  ψ(α₀+1) − Σ (α_i/α₀) ψ(α_i+1).
double entropy_mean(const DirichletParams& params);

// E[(log b_i)²] = ψ₁(α_i) − ψ₁(α₀) + (ψ(α_i) − ψ(α₀))².
double log_moment_squared(const DirichletParams& params, std::size_t i);

// E[log b_i log b_j] = −ψ₁(α₀) + (ψ(α_i) − ψ(α₀))(ψ(α_j) − ψ(α₀)), i ≠ j.
double log_cross_moment(const DirichletParams& params, std::size_t i,
                        std::size_t j);

// E[H(b)²] from the closed-form expression, in O(K).
double entropy_second_moment(const DirichletParams& params);

// E[H(b)²] assembled term by term from log_moment_squared and
// log_cross_moment at the shifted parameters α+2e_i and α+e_i+e_j, in O(K²).
// Independent route used to cross-check entropy_second_moment.
double entropy_second_moment_from_lemmas(const DirichletParams& params);

// E[H²] − E[H]², clamped at 0 when rounding pushes it slightly negative.
double entropy_variance(const DirichletParams& params);

EntropyMoments entropy_moments(const DirichletParams& params);

}  // namespace entroscope
