#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "entroscope/data_model.hpp"
#include "entroscope/support_belief.hpp"

namespace entroscope {

struct EstimatorConfig {
  double alpha_prior = 0.5;
  double gamma = 0.01;  // adaptive stop once Var[h] <= gamma; 0 never stops early
  std::size_t mc_samples = 10'000;
  std::optional<std::size_t> n_max;  // adaptive cap; the prompt's pool size if unset
  bool use_constraints = true;
  bool strict_support_conditioning = false;

  void validate() const;
};

/// Bayesian belief about the semantic entropy of one batch.
///
/// For every K the conditioned support prior allows, the posterior is
/// Dir(α + c) over K meanings (α alone for the K − k_min unseen ones),
/// truncated to the probability-mass lower bounds of the observed texts.
/// Moments come from the closed form when no bound is active and from
/// self-normalised importance sampling otherwise; they are then mixed over K.
/// Monte Carlo seeds derive from (batch.stream_seed, N, K), so a batch that is
/// a prefix of the same stream always yields the same belief.
EntropyBelief bayesian_estimate(const SampleBatch& batch, const SupportPrior& prior,
                                const EstimatorConfig& cfg);

// Beliefs after 1, 2, ... draws from the prompt's stream; stops at the first
// belief with variance <= stop_gamma, or at n_max.
std::vector<EntropyBelief> adaptive_trajectory(const PromptRecord& prompt,
                                               const SupportPrior& prior,
                                               const EstimatorConfig& cfg,
                                               std::uint64_t seed, double stop_gamma);

// Draws one sample at a time until Var[h] <= cfg.gamma or n_max is reached.
EntropyBelief adaptive_estimate(const PromptRecord& prompt, const SupportPrior& prior,
                                const EstimatorConfig& cfg, std::uint64_t seed);

// Plug-in entropy of the empirical meaning histogram.
double histogram_entropy(const MeaningCounts& counts);

// Entropy of the meaning distribution obtained by summing the probabilities
// of distinct sequences per meaning and normalising. With length_normalized,
// exp(log_prob_len_norm) replaces the sequence probability.
double rescaled_entropy(const SampleBatch& batch, bool length_normalized);

// −log p of the low-temperature answer; higher = more likely hallucination.
double log_likelihood_score(const PromptRecord& prompt);

// 1 − P(true); higher = more likely hallucination.
double p_true_score(const PromptRecord& prompt);

enum class Estimator {
  Bayes,
  Histogram,
  Rescaled,
  RescaledHeuristic,  // length-normalised probabilities
  LogLikelihood,
  PTrue,
};

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);
std::vector<Estimator> all_estimators();

// True for the estimators that target the semantic entropy itself.
bool estimates_entropy(Estimator e);

// Hallucination score of one prompt given its batch.
double score(Estimator e, const PromptRecord& prompt, const SampleBatch& batch,
             const SupportPrior& prior, const EstimatorConfig& cfg);

}  // namespace entroscope
