#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "entroscope/data_model.hpp"
#include "entroscope/estimators.hpp"
#include "entroscope/support_belief.hpp"

namespace entroscope {

inline constexpr std::size_t kDefaultBootstrapReps = 1000;

// Mann–Whitney AUROC: P(score⁺ > score⁻) + ½ P(score⁺ = score⁻). Labels are
// 0/1 with 1 the positive (hallucination) class; both classes must occur.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct BootstrapResult {
  double point = 0.0;       // AUROC on the full set
  double mean = 0.0;        // mean AUROC across resamples
  double half_width = 0.0;  // 1.96 × bootstrap standard deviation
  std::size_t reps = 0;
};

// Resamples prompts with replacement. A resample with a single class is
// redrawn (bounded retries) before giving up.
BootstrapResult bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                             std::size_t reps, std::uint64_t seed);

struct EvalRow {
  std::string estimator;
  double n = 0.0;  // fixed N, or average n_used for adaptive rows
  double auroc = 0.0;
  double ci_half_width = 0.0;
  std::optional<double> rmse;
  std::optional<double> gamma;  // adaptive rows only
  std::size_t low_ess_prompts = 0;  // Bayesian rows: prompts with importance ESS < 100
};

struct DatasetSplit {
  std::span<const PromptRecord> train;
  std::span<const PromptRecord> test;
};

// Positional split: the first train_count prompts train the support prior.
DatasetSplit split_dataset(std::span<const PromptRecord> prompts, std::size_t train_count);

// Subsamples every test prompt to each N, scores it with each estimator and
// reports AUROC with a bootstrap interval. One row per (N, estimator), in
// that nesting order.
std::vector<EvalRow> run_fixed_budget(std::span<const PromptRecord> test,
                                      const SupportPrior& prior, const EstimatorConfig& cfg,
                                      std::span<const std::size_t> n_list,
                                      std::span<const Estimator> estimators, std::uint64_t seed,
                                      std::size_t bootstrap_reps = kDefaultBootstrapReps);

// One adaptive Bayesian row per gamma, in the given order. Each prompt's
// belief trajectory is computed once and shared by every gamma, which is
// identical to running adaptive_estimate per gamma with the same seed.
std::vector<EvalRow> run_adaptive_sweep(std::span<const PromptRecord> test,
                                        const SupportPrior& prior, const EstimatorConfig& cfg,
                                        std::span<const double> gammas, std::uint64_t seed,
                                        std::size_t bootstrap_reps = kDefaultBootstrapReps);

using EntropyScoreFn = std::function<double(const PromptRecord&, const SampleBatch&)>;

double rmse_vs_truth(std::span<const PromptRecord> dataset, const EntropyScoreFn& estimate,
                     std::size_t n, std::uint64_t seed);
double rmse_vs_truth(std::span<const PromptRecord> dataset, Estimator estimator,
                     const SupportPrior& prior, const EstimatorConfig& cfg, std::size_t n,
                     std::uint64_t seed);

std::string rows_to_csv(const std::vector<EvalRow>& rows);
nlohmann::json rows_to_json(const std::vector<EvalRow>& rows);

}  // namespace entroscope
