#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "entroscope/data_model.hpp"

namespace entroscope {

inline constexpr int kPriorFileVersion = 1;

/// Discrete belief over the number of meanings K.
class SupportPrior {
 public:
  // Normalises the weights; drops zero entries. Throws if no positive weight
  // remains or any key is 0.
  explicit SupportPrior(std::map<std::size_t, double> weights);

  static SupportPrior point_mass(std::size_t support);

  const std::map<std::size_t, double>& weights() const { return weights_; }
  double weight(std::size_t support) const;
  std::size_t max_support() const { return weights_.rbegin()->first; }
  std::size_t min_support() const { return weights_.begin()->first; }

  nlohmann::json to_json() const;
  static SupportPrior from_json(const nlohmann::json& j);

 private:
  std::map<std::size_t, double> weights_;
};

// Relative frequencies of the support sizes (distinct meanings in each full
// pool). smoothing > 0 adds that pseudo-count to every size in [1, M].
SupportPrior fit_support_prior(std::span<const PromptRecord> training,
                               double smoothing = 0.0);

enum class SupportConditioning {
  AtLeast,  // K >= k_min
  Strict,   // K > k_min
};

/// Restricts the prior to supports compatible with k_min observed meanings
/// and renormalises. Falls back to a point mass at k_min when nothing
/// survives.
SupportPrior condition_support(const SupportPrior& prior, std::size_t k_min,
                               SupportConditioning mode = SupportConditioning::AtLeast);

struct ConditionalEntropy {
  double mean = 0.0;
  double variance = 0.0;
};

struct SupportComponent {
  std::size_t support = 0;
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Belief about the semantic entropy, in nats.
struct EntropyBelief {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t n_used = 0;
  std::vector<SupportComponent> per_support;
  // Smallest importance-sampling ESS behind this belief; infinite if every
  // support hypothesis was computed exactly.
  double min_effective_sample_size = std::numeric_limits<double>::infinity();
};

// Law of total expectation and variance over K.
EntropyBelief aggregate_over_support(const SupportPrior& conditioned,
                                     const std::map<std::size_t, ConditionalEntropy>& per_support);

}  // namespace entroscope
