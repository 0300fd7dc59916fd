#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroscope/data_model.hpp"
#include "entroscope/estimators.hpp"

namespace entroscope::cli {

struct RunConfig {
  std::string command;
  std::filesystem::path dataset;
  std::filesystem::path prior;
  std::filesystem::path out;
  double alpha = 0.5;
  std::optional<double> gamma;
  std::vector<double> gammas;
  std::vector<std::size_t> n_list;
  std::size_t mc_samples = 10'000;
  std::optional<std::size_t> n_max;
  std::optional<std::uint64_t> seed;
  std::size_t train_count = 200;
  std::vector<Estimator> estimators;
  bool strict_support = false;
  bool no_constraints = false;
  std::size_t bootstrap_reps = 1000;
  SyntheticSpec synth;
};

// Fits the support prior on the first train_count prompts; writes JSON.
void cmd_fit_prior(const RunConfig& cfg);

// Fixed-budget rows for every N, then adaptive rows for every gamma, over
// the prompts after train_count. CSV unless --out ends in ".json".
// Low effective-sample-size warnings go to `warnings` when given.
void cmd_evaluate(const RunConfig& cfg, std::ostream* warnings = nullptr);

// Writes a synthetic JSONL dataset carrying true_se.
void cmd_synth(const RunConfig& cfg);

// Parses argv and dispatches. Returns the process exit code; failures are
// reported on `err` as a one-line JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace entroscope::cli
