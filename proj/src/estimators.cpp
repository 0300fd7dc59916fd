#include "entroscope/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "entroscope/dirichlet_moments.hpp"
#include "entroscope/entropy.hpp"
#include "entroscope/rng.hpp"
#include "entroscope/truncated_mc.hpp"

namespace entroscope {

void EstimatorConfig::validate() const {
  if (!(alpha_prior > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
  if (n_max && *n_max == 0) throw std::invalid_argument("n_max must be positive");
}

EntropyBelief bayesian_estimate(const SampleBatch& batch, const SupportPrior& prior,
                                const EstimatorConfig& cfg) {
  cfg.validate();
  if (batch.records.empty()) throw std::invalid_argument("bayesian_estimate: empty batch");

  const MeaningCounts tally = count_meanings(batch);
  std::vector<std::size_t> counts;
  counts.reserve(tally.distinct());
  for (const auto& [meaning, c] : tally.by_meaning) counts.push_back(c);
  const std::size_t k_min = counts.size();

  const SupportPrior conditioned = condition_support(
      prior, k_min,
      cfg.strict_support_conditioning ? SupportConditioning::Strict
                                      : SupportConditioning::AtLeast);

  const std::uint64_t step_seed = derive_seed(batch.stream_seed, batch.size());
  std::map<std::size_t, ConditionalEntropy> per_support;
  double min_ess = std::numeric_limits<double>::infinity();
  for (const auto& [support, weight] : conditioned.weights()) {
    const DirichletParams params = DirichletParams::posterior(cfg.alpha_prior, counts, support);
    ConditionalEntropy moments;
    std::optional<LowerBounds> bounds;
    if (cfg.use_constraints) bounds = build_constraints(batch, support);
    if (!bounds || bounds->all_zero()) {
      const EntropyMoments exact = entropy_moments(params);
      moments = {exact.mean, exact.variance};
    } else {
      const TruncatedMoments mc = snis_entropy_moments(
          params, *bounds, cfg.mc_samples, derive_seed(step_seed, support));
      moments = {mc.mean, mc.variance};
      min_ess = std::min(min_ess, mc.effective_sample_size);
    }
    per_support.emplace(support, moments);
  }

  EntropyBelief belief = aggregate_over_support(conditioned, per_support);
  belief.n_used = batch.size();
  belief.min_effective_sample_size = min_ess;
  return belief;
}

std::vector<EntropyBelief> adaptive_trajectory(const PromptRecord& prompt,
                                               const SupportPrior& prior,
                                               const EstimatorConfig& cfg,
                                               std::uint64_t seed, double stop_gamma) {
  cfg.validate();
  const std::size_t n_max = cfg.n_max.value_or(prompt.samples.size());
  // The full stream up front; every prefix equals subsample(prompt, n, seed).
  const SampleBatch stream = subsample(prompt, n_max, seed);

  std::vector<EntropyBelief> trajectory;
  SampleBatch batch;
  batch.prompt_id = stream.prompt_id;
  batch.stream_seed = stream.stream_seed;
  for (const SampleRecord& record : stream.records) {
    batch.records.push_back(record);
    trajectory.push_back(bayesian_estimate(batch, prior, cfg));
    // gamma = 0 never stops early, even on an exactly known entropy.
    if (stop_gamma > 0.0 && trajectory.back().variance <= stop_gamma) break;
  }
  return trajectory;
}

EntropyBelief adaptive_estimate(const PromptRecord& prompt, const SupportPrior& prior,
                                const EstimatorConfig& cfg, std::uint64_t seed) {
  return adaptive_trajectory(prompt, prior, cfg, seed, cfg.gamma).back();
}

double histogram_entropy(const MeaningCounts& counts) {
  if (counts.total == 0) throw std::invalid_argument("histogram_entropy: no samples");
  const double n = static_cast<double>(counts.total);
  double h = 0.0;
  for (const auto& [meaning, c] : counts.by_meaning) {
    const double p = static_cast<double>(c) / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double rescaled_entropy(const SampleBatch& batch, bool length_normalized) {
  std::map<int, double> mass;
  std::unordered_set<std::string_view> seen;
  double total = 0.0;
  for (const SampleRecord& r : batch.records) {
    if (!seen.insert(r.text).second) continue;
    const double p = std::exp(length_normalized ? r.log_prob_len_norm : r.log_prob);
    mass[r.meaning] += p;
    total += p;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("rescaled_entropy: all sequence probabilities are zero");
  std::vector<double> q;
  q.reserve(mass.size());
  for (const auto& [meaning, m] : mass) q.push_back(m / total);
  return shannon_entropy(q);
}

double log_likelihood_score(const PromptRecord& prompt) {
  if (!prompt.low_temp_log_prob)
    throw DataError("prompt '" + prompt.prompt_id + "': missing low_temp_log_prob");
  return -*prompt.low_temp_log_prob;
}

double p_true_score(const PromptRecord& prompt) {
  if (!prompt.p_true) throw DataError("prompt '" + prompt.prompt_id + "': missing p_true");
  return 1.0 - *prompt.p_true;
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Bayes: return "bayes";
    case Estimator::Histogram: return "histogram";
    case Estimator::Rescaled: return "rescaled";
    case Estimator::RescaledHeuristic: return "rescaled_h";
    case Estimator::LogLikelihood: return "log_likelihood";
    case Estimator::PTrue: return "p_true";
  }
  return "unknown";
}

std::vector<Estimator> all_estimators() {
  return {Estimator::Bayes,         Estimator::Histogram,     Estimator::Rescaled,
          Estimator::RescaledHeuristic, Estimator::LogLikelihood, Estimator::PTrue};
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : all_estimators()) {
    if (estimator_name(e) == name) return e;
  }
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

bool estimates_entropy(Estimator e) {
  return e != Estimator::LogLikelihood && e != Estimator::PTrue;
}

double score(Estimator e, const PromptRecord& prompt, const SampleBatch& batch,
             const SupportPrior& prior, const EstimatorConfig& cfg) {
  switch (e) {
    case Estimator::Bayes: return bayesian_estimate(batch, prior, cfg).mean;
    case Estimator::Histogram: return histogram_entropy(count_meanings(batch));
    case Estimator::Rescaled: return rescaled_entropy(batch, false);
    case Estimator::RescaledHeuristic: return rescaled_entropy(batch, true);
    case Estimator::LogLikelihood: return log_likelihood_score(prompt);
    case Estimator::PTrue: return p_true_score(prompt);
  }
  throw std::logic_error("unhandled estimator");
}

}  // namespace entroscope
