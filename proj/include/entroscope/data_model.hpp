#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace entroscope {

inline constexpr int kSchemaVersion = 1;

// Distinct-text probability mass may exceed 1 by this much (float slack only).
inline constexpr double kMassTolerance = 1e-6;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One LLM generation.
struct SampleRecord {
  std::string text;
  int meaning = 0;
  double log_prob = 0.0;           // ln p(s|x)
  double log_prob_len_norm = 0.0;  // mean per-token log-probability

  double probability() const;
  bool operator==(const SampleRecord&) const = default;
};

/// A prompt's full sample pool plus the per-prompt baseline inputs.
///
/// Meaning labels are dense in [0, support_size()) after validation;
/// `source_meanings[j]` holds the label that dense index j had on disk.
struct PromptRecord {
  std::string prompt_id;
  std::vector<SampleRecord> samples;
  std::optional<double> low_temp_log_prob;
  std::optional<double> p_true;
  int label = 0;  // 1 = hallucination
  std::optional<double> true_se;
  std::vector<int> source_meanings;

  std::size_t support_size() const { return source_meanings.size(); }
  bool operator==(const PromptRecord&) const = default;
};

/// N draws from one prompt's pool. `stream_seed` identifies the prompt's
/// random stream; downstream Monte Carlo derives its seeds from it.
struct SampleBatch {
  std::string prompt_id;
  std::uint64_t stream_seed = 0;
  std::vector<SampleRecord> records;

  std::size_t size() const { return records.size(); }
};

/// Per-meaning tallies of a batch, keyed by meaning label.
struct MeaningCounts {
  std::map<int, std::size_t> by_meaning;
  std::size_t total = 0;

  std::size_t distinct() const { return by_meaning.size(); }
};

// Relabels meanings densely and checks every record invariant. Throws
// DataError naming the prompt and field on violation.
void validate_prompt(PromptRecord& prompt);

PromptRecord prompt_from_json(const nlohmann::json& j);
nlohmann::json prompt_to_json(const PromptRecord& prompt);

// Reads line-delimited JSON, one prompt per line. Blank lines are skipped.
std::vector<PromptRecord> load_dataset(const std::filesystem::path& path);
std::vector<PromptRecord> parse_dataset(std::string_view contents);

void write_dataset(const std::filesystem::path& path,
                   const std::vector<PromptRecord>& prompts);
std::string serialize_dataset(const std::vector<PromptRecord>& prompts);

// Seed of the per-prompt stream: hash(seed, prompt_id).
std::uint64_t prompt_stream_seed(std::uint64_t seed, std::string_view prompt_id);

/// Draws n records uniformly with replacement. The draws form one stream per
/// (seed, prompt_id), so subsample(p, n, s) is a prefix of subsample(p, n+1, s).
SampleBatch subsample(const PromptRecord& prompt, std::size_t n,
                      std::uint64_t seed);

MeaningCounts count_meanings(const SampleBatch& batch);

enum class MeaningFamily { Dirichlet, Zipf, Fixed };

/// Recipe for synthetic prompts with known meaning distributions.
///
/// Each meaning's mass is split over `variants_per_meaning` distinct texts
/// with geometric weights split_ratio^k, so the sequence probabilities of a
/// meaning sum exactly to the meaning probability.
struct SyntheticSpec {
  std::size_t num_prompts = 100;
  MeaningFamily family = MeaningFamily::Dirichlet;
  double concentration = 1.0;  // Dirichlet family
  double zipf_exponent = 1.0;  // Zipf family
  std::vector<double> fixed_probs;  // Fixed family
  std::size_t min_meanings = 2;
  std::size_t max_meanings = 6;
  std::size_t variants_per_meaning = 8;
  double split_ratio = 0.5;
  std::size_t pool_size = 100;
  // Hallucination label is true_se > threshold; median of the set if unset.
  std::optional<double> label_threshold;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<PromptRecord> prompts;
  std::vector<double> true_se;
  // Exact meaning distribution behind each prompt.
  std::vector<std::vector<double>> meaning_probs;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec,
                                    std::uint64_t seed);

}  // namespace entroscope
