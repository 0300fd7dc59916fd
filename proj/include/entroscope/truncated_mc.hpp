#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "entroscope/data_model.hpp"
#include "entroscope/dirichlet_moments.hpp"
#include "entroscope/rng.hpp"

namespace entroscope {

// Covered mass in (1, 1 + kMassTolerance] is scaled down to this value.
inline constexpr double kRescaledCoveredMass = 1.0 - 1e-9;

// Below this effective sample size the SNIS estimate is flagged.
inline constexpr double kLowEffectiveSampleSize = 100.0;

/// Per-meaning lower bounds on the meaning probabilities.
struct LowerBounds {
  std::vector<double> bounds;
  double covered_mass = 0.0;
  bool rescaled = false;  // covered mass was pulled back from just above 1

  std::size_t size() const { return bounds.size(); }
  bool all_zero() const { return covered_mass == 0.0; }
};

// Validates and wraps explicit bounds, applying the covered-mass clamp rule.
LowerBounds make_lower_bounds(std::vector<double> bounds);

// Meaning labels observed in the batch, ascending; slot j of the bound and
// count vectors refers to observed_meanings(batch)[j].
std::vector<int> observed_meanings(const SampleBatch& batch);

/// bound_j = Σ exp(log_prob) over DISTINCT texts of meaning slot j; slots
/// from the number of observed meanings up to K are unobserved and get 0.
LowerBounds build_constraints(const SampleBatch& batch, std::size_t support);

/// Uniform sampler over {b ∈ Δ^K : b ≥ l}, realised as b = l + (1 − Σl)·u
/// with u uniform on the simplex (normalised exponentials).
class TruncatedSimplexSampler {
 public:
  explicit TruncatedSimplexSampler(const LowerBounds& bounds);

  void draw(Rng& rng, std::span<double> out) const;
  std::size_t dimension() const { return bounds_.size(); }

 private:
  std::vector<double> bounds_;
  double free_mass_;
};

std::vector<std::vector<double>> sample_truncated_uniform(const LowerBounds& bounds,
                                                          std::size_t m,
                                                          std::uint64_t seed);

struct TruncatedMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  double effective_sample_size = 0.0;
  // Delta-method standard error of the self-normalised mean.
  double mean_std_error = 0.0;
  std::size_t mc_samples = 0;

  bool low_ess() const { return effective_sample_size < kLowEffectiveSampleSize; }
};

/// Entropy mean and second moment under Dir(α) truncated to b ≥ bounds, by
/// self-normalised importance sampling with the uniform proposal above.
/// Both moments share one sample set and one set of weights.
TruncatedMoments snis_entropy_moments(const DirichletParams& params,
                                      const LowerBounds& bounds, std::size_t m,
                                      std::uint64_t seed);

}  // namespace entroscope
