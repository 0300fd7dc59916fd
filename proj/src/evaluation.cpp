#include "entroscope/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "entroscope/parallel.hpp"
#include "entroscope/rng.hpp"
#include "entroscope/truncated_mc.hpp"

namespace entroscope {

namespace {

constexpr double kZ95 = 1.96;
constexpr int kResampleRetries = 100;

bool has_both_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int l : labels) (l ? pos : neg) = true;
  return pos && neg;
}

bool all_have_truth(std::span<const PromptRecord> prompts) {
  return !prompts.empty() && std::all_of(prompts.begin(), prompts.end(),
                                         [](const PromptRecord& p) { return p.true_se.has_value(); });
}

double rmse_of(std::span<const PromptRecord> prompts, std::span<const double> estimates) {
  double sq = 0.0;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const double d = estimates[i] - *prompts[i].true_se;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(prompts.size()));
}

std::vector<int> labels_of(std::span<const PromptRecord> prompts) {
  std::vector<int> labels;
  labels.reserve(prompts.size());
  for (const PromptRecord& p : prompts) labels.push_back(p.label);
  return labels;
}

std::string format_number(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auroc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("auroc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auroc: need both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum of positives with tied blocks sharing their average rank; kept
  // in doubled units so every quantity is an exact integer.
  double doubled_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_block = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      pos_in_block += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    // Ranks i+1 .. j average to (i + 1 + j) / 2.
    doubled_rank_sum += static_cast<double>(pos_in_block) * static_cast<double>(i + 1 + j);
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  const double doubled_u = doubled_rank_sum - p * (p + 1.0);
  return doubled_u / (2.0 * p * static_cast<double>(n_neg));
}

BootstrapResult bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                             std::size_t reps, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("bootstrap_ci: need at least 2 resamples");
  BootstrapResult out;
  out.point = auroc(scores, labels);
  out.reps = reps;

  const std::size_t n = scores.size();
  std::vector<double> values(reps);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int attempt = 0;; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = uniform_index(rng, n);
        s[i] = scores[pick];
        l[i] = labels[pick];
      }
      if (has_both_classes(l)) break;
      if (attempt + 1 >= kResampleRetries)
        throw std::runtime_error("bootstrap_ci: resamples keep missing a class");
    }
    values[r] = auroc(s, l);
  });

  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.half_width = kZ95 * std::sqrt(ss / static_cast<double>(reps - 1));
  return out;
}

DatasetSplit split_dataset(std::span<const PromptRecord> prompts, std::size_t train_count) {
  if (train_count > prompts.size())
    throw std::invalid_argument("train_count " + std::to_string(train_count) +
                                " exceeds the " + std::to_string(prompts.size()) +
                                " prompts in the dataset");
  return {prompts.first(train_count), prompts.subspan(train_count)};
}

std::vector<EvalRow> run_fixed_budget(std::span<const PromptRecord> test,
                                      const SupportPrior& prior, const EstimatorConfig& cfg,
                                      std::span<const std::size_t> n_list,
                                      std::span<const Estimator> estimators, std::uint64_t seed,
                                      std::size_t bootstrap_reps) {
  if (test.empty()) throw std::invalid_argument("run_fixed_budget: empty test set");
  cfg.validate();
  const std::vector<int> labels = labels_of(test);
  const bool with_truth = all_have_truth(test);

  std::vector<EvalRow> rows;
  for (std::size_t n : n_list) {
    std::vector<SampleBatch> batches(test.size());
    parallel_for(test.size(), [&](std::size_t i) { batches[i] = subsample(test[i], n, seed); });

    for (Estimator e : estimators) {
      std::vector<double> scores(test.size());
      std::vector<char> low_ess(test.size(), 0);
      parallel_for(test.size(), [&](std::size_t i) {
        try {
          if (e == Estimator::Bayes) {
            const EntropyBelief belief = bayesian_estimate(batches[i], prior, cfg);
            scores[i] = belief.mean;
            low_ess[i] = belief.min_effective_sample_size < kLowEffectiveSampleSize;
          } else {
            scores[i] = score(e, test[i], batches[i], prior, cfg);
          }
        } catch (const std::exception& ex) {
          throw std::runtime_error("prompt '" + test[i].prompt_id + "': " + ex.what());
        }
      });
      const std::string name(estimator_name(e));
      const BootstrapResult ci = bootstrap_ci(
          scores, labels, bootstrap_reps, derive_seed(derive_seed(seed, name), n));
      EvalRow row{name, static_cast<double>(n), ci.point, ci.half_width, std::nullopt,
                  std::nullopt, static_cast<std::size_t>(std::count(low_ess.begin(), low_ess.end(), 1))};
      if (with_truth && estimates_entropy(e)) row.rmse = rmse_of(test, scores);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<EvalRow> run_adaptive_sweep(std::span<const PromptRecord> test,
                                        const SupportPrior& prior, const EstimatorConfig& cfg,
                                        std::span<const double> gammas, std::uint64_t seed,
                                        std::size_t bootstrap_reps) {
  if (test.empty()) throw std::invalid_argument("run_adaptive_sweep: empty test set");
  if (gammas.empty()) return {};
  for (double g : gammas) {
    if (!(g >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  }
  cfg.validate();
  const double smallest = *std::min_element(gammas.begin(), gammas.end());

  std::vector<std::vector<EntropyBelief>> trajectories(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    try {
      trajectories[i] = adaptive_trajectory(test[i], prior, cfg, seed, smallest);
    } catch (const std::exception& ex) {
      throw std::runtime_error("prompt '" + test[i].prompt_id + "': " + ex.what());
    }
  });

  const std::vector<int> labels = labels_of(test);
  const bool with_truth = all_have_truth(test);
  std::vector<EvalRow> rows;
  for (double gamma : gammas) {
    std::vector<double> scores(test.size());
    double total_n = 0.0;
    std::size_t low_ess = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto& traj = trajectories[i];
      auto stop = std::find_if(traj.begin(), traj.end(), [&](const EntropyBelief& b) {
        return gamma > 0.0 && b.variance <= gamma;
      });
      const EntropyBelief& final_belief = stop == traj.end() ? traj.back() : *stop;
      scores[i] = final_belief.mean;
      total_n += static_cast<double>(final_belief.n_used);
      low_ess += final_belief.min_effective_sample_size < kLowEffectiveSampleSize;
    }
    const BootstrapResult ci =
        bootstrap_ci(scores, labels, bootstrap_reps,
                     derive_seed(derive_seed(seed, "adaptive"), std::bit_cast<std::uint64_t>(gamma)));
    EvalRow row{"bayes_adaptive", total_n / static_cast<double>(test.size()), ci.point,
                ci.half_width, std::nullopt, gamma, low_ess};
    if (with_truth) row.rmse = rmse_of(test, scores);
    rows.push_back(std::move(row));
  }
  return rows;
}

double rmse_vs_truth(std::span<const PromptRecord> dataset, const EntropyScoreFn& estimate,
                     std::size_t n, std::uint64_t seed) {
  if (dataset.empty()) throw std::invalid_argument("rmse_vs_truth: empty dataset");
  for (const PromptRecord& p : dataset) {
    if (!p.true_se) throw DataError("prompt '" + p.prompt_id + "': missing true_se");
  }
  std::vector<double> estimates(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) {
    estimates[i] = estimate(dataset[i], subsample(dataset[i], n, seed));
  });
  return rmse_of(dataset, estimates);
}

double rmse_vs_truth(std::span<const PromptRecord> dataset, Estimator estimator,
                     const SupportPrior& prior, const EstimatorConfig& cfg, std::size_t n,
                     std::uint64_t seed) {
  if (!estimates_entropy(estimator))
    throw std::invalid_argument("rmse_vs_truth: estimator does not estimate entropy");
  return rmse_vs_truth(
      dataset,
      [&](const PromptRecord& p, const SampleBatch& b) { return score(estimator, p, b, prior, cfg); },
      n, seed);
}

std::string rows_to_csv(const std::vector<EvalRow>& rows) {
  std::string out = "estimator,n_or_avg_n,auroc,ci_half_width,rmse,gamma\n";
  for (const EvalRow& r : rows) {
    out += r.estimator;
    out += ',' + format_number(r.n, "%.4f");
    out += ',' + format_number(r.auroc, "%.6f");
    out += ',' + format_number(r.ci_half_width, "%.6f");
    out += ',' + (r.rmse ? format_number(*r.rmse, "%.6f") : std::string());
    out += ',' + (r.gamma ? format_number(*r.gamma, "%.6g") : std::string());
    out += '\n';
  }
  return out;
}

nlohmann::json rows_to_json(const std::vector<EvalRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const EvalRow& r : rows) {
    nlohmann::json j{{"estimator", r.estimator},
                     {"n_or_avg_n", r.n},
                     {"auroc", r.auroc},
                     {"ci_half_width", r.ci_half_width}};
    j["rmse"] = r.rmse ? nlohmann::json(*r.rmse) : nlohmann::json(nullptr);
    if (r.gamma) j["gamma"] = *r.gamma;
    if (r.low_ess_prompts > 0) j["low_ess_prompts"] = r.low_ess_prompts;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace entroscope
