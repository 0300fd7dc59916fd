#include "entroscope/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "entroscope/evaluation.hpp"
#include "entroscope/support_belief.hpp"

namespace entroscope::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_input(const std::filesystem::path& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!std::filesystem::is_regular_file(path))
    throw UsageError(std::string(flag) + " '" + path.string() + "' does not exist");
}

void require_output(const std::filesystem::path& path) {
  if (path.empty()) throw UsageError("--out is required");
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(dir))
    throw UsageError("output directory '" + dir.string() + "' does not exist");
}

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw UsageError("--seed is required for " + cfg.command);
  return *cfg.seed;
}

EstimatorConfig estimator_config(const RunConfig& cfg) {
  EstimatorConfig ec;
  ec.alpha_prior = cfg.alpha;
  if (cfg.gamma) ec.gamma = *cfg.gamma;
  ec.mc_samples = cfg.mc_samples;
  ec.n_max = cfg.n_max;
  ec.use_constraints = !cfg.no_constraints;
  ec.strict_support_conditioning = cfg.strict_support;
  ec.validate();
  return ec;
}

std::string_view family_name(MeaningFamily f) {
  switch (f) {
    case MeaningFamily::Dirichlet: return "dirichlet";
    case MeaningFamily::Zipf: return "zipf";
    case MeaningFamily::Fixed: return "fixed";
  }
  return "unknown";
}

// Provenance record of every effective setting; no timestamps so reruns
// stay byte-identical.
nlohmann::json manifest(const RunConfig& cfg) {
  nlohmann::json m;
  m["command"] = cfg.command;
  m["dataset"] = cfg.dataset.string();
  m["prior"] = cfg.prior.string();
  m["out"] = cfg.out.string();
  m["seed"] = cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr);
  if (cfg.command == "synth") {
    const SyntheticSpec& s = cfg.synth;
    m["synthetic"] = {{"prompts", s.num_prompts},
                      {"family", family_name(s.family)},
                      {"concentration", s.concentration},
                      {"zipf_exponent", s.zipf_exponent},
                      {"probs", s.fixed_probs},
                      {"min_meanings", s.min_meanings},
                      {"max_meanings", s.max_meanings},
                      {"variants", s.variants_per_meaning},
                      {"split_ratio", s.split_ratio},
                      {"pool_size", s.pool_size}};
    return m;
  }
  m["train_count"] = cfg.train_count;
  if (cfg.command == "evaluate") {
    m["alpha"] = cfg.alpha;
    m["gamma"] = cfg.gamma ? nlohmann::json(*cfg.gamma) : nlohmann::json(nullptr);
    m["gammas"] = cfg.gammas;
    m["n_list"] = cfg.n_list;
    m["mc_samples"] = cfg.mc_samples;
    m["n_max"] = cfg.n_max ? nlohmann::json(*cfg.n_max) : nlohmann::json(nullptr);
    m["strict_support"] = cfg.strict_support;
    m["use_constraints"] = !cfg.no_constraints;
    m["bootstrap_reps"] = cfg.bootstrap_reps;
    nlohmann::json names = nlohmann::json::array();
    for (Estimator e : cfg.estimators) names.push_back(estimator_name(e));
    m["estimators"] = names;
  }
  return m;
}

void write_manifest(const RunConfig& cfg) {
  auto path = cfg.out;
  path += ".manifest.json";
  write_file_atomically(path, manifest(cfg).dump(2) + "\n");
}

DatasetSplit split_checked(std::span<const PromptRecord> prompts, std::size_t train_count) {
  if (train_count > prompts.size())
    throw UsageError("--train-count " + std::to_string(train_count) + " exceeds the " +
                     std::to_string(prompts.size()) + " prompts in the dataset");
  return split_dataset(prompts, train_count);
}

}  // namespace

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

void cmd_fit_prior(const RunConfig& cfg) {
  require_input(cfg.dataset, "--dataset");
  require_output(cfg.out);
  const auto prompts = load_dataset(cfg.dataset);
  const DatasetSplit split = split_checked(prompts, cfg.train_count);
  if (split.train.empty()) throw UsageError("--train-count must be positive");
  const SupportPrior prior = fit_support_prior(split.train);
  write_file_atomically(cfg.out, prior.to_json().dump(2) + "\n");
  write_manifest(cfg);
}

void cmd_evaluate(const RunConfig& cfg, std::ostream* warnings) {
  require_input(cfg.dataset, "--dataset");
  if (!cfg.prior.empty()) require_input(cfg.prior, "--prior");
  require_output(cfg.out);
  const std::uint64_t seed = require_seed(cfg);
  const EstimatorConfig ec = estimator_config(cfg);

  const auto prompts = load_dataset(cfg.dataset);
  const DatasetSplit split = split_checked(prompts, cfg.train_count);
  if (split.test.empty()) throw UsageError("no test prompts after --train-count");

  std::optional<SupportPrior> prior;
  if (!cfg.prior.empty()) {
    std::ifstream in(cfg.prior);
    prior = SupportPrior::from_json(nlohmann::json::parse(in));
  } else {
    if (split.train.empty())
      throw UsageError("either --prior or a positive --train-count is required");
    prior = fit_support_prior(split.train);
  }

  std::vector<EvalRow> rows;
  if (!cfg.n_list.empty()) {
    const std::vector<Estimator> estimators =
        cfg.estimators.empty() ? all_estimators() : cfg.estimators;
    rows = run_fixed_budget(split.test, *prior, ec, cfg.n_list, estimators, seed,
                            cfg.bootstrap_reps);
  }
  if (!cfg.gammas.empty()) {
    auto adaptive = run_adaptive_sweep(split.test, *prior, ec, cfg.gammas, seed,
                                       cfg.bootstrap_reps);
    rows.insert(rows.end(), adaptive.begin(), adaptive.end());
  }

  if (warnings) {
    for (const EvalRow& r : rows) {
      if (r.low_ess_prompts == 0) continue;
      *warnings << nlohmann::json{{"warning", "importance sampling ESS below 100"},
                                  {"estimator", r.estimator},
                                  {"n_or_avg_n", r.n},
                                  {"prompts", r.low_ess_prompts}}
                       .dump()
                << "\n";
    }
  }

  const bool as_json = cfg.out.extension() == ".json";
  write_file_atomically(cfg.out, as_json ? rows_to_json(rows).dump(2) + "\n" : rows_to_csv(rows));
  write_manifest(cfg);
}

void cmd_synth(const RunConfig& cfg) {
  require_output(cfg.out);
  const std::uint64_t seed = require_seed(cfg);
  const SyntheticDataset data = generate_synthetic(cfg.synth, seed);
  write_file_atomically(cfg.out, serialize_dataset(data.prompts));
  write_manifest(cfg);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Bayesian semantic-entropy estimation and hallucination-detection evaluation"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output path")->required();
  };

  auto* fit = app.add_subcommand("fit-prior", "Fit the support-size prior on the training split");
  fit->add_option("--dataset", cfg.dataset, "JSONL dataset")->required();
  fit->add_option("--train-count", cfg.train_count, "Leading prompts used for training");
  add_common(fit);

  std::optional<std::size_t> single_n;
  std::vector<std::string> estimator_names;
  std::vector<double> gammas;
  auto* eval = app.add_subcommand("evaluate", "AUROC tables and adaptive sweeps on the test split");
  eval->add_option("--dataset", cfg.dataset, "JSONL dataset")->required();
  eval->add_option("--prior", cfg.prior, "Support prior JSON (fitted on the train split if absent)");
  eval->add_option("--alpha", cfg.alpha, "Symmetric Dirichlet prior");
  eval->add_option("--gamma", cfg.gamma, "Adaptive variance threshold");
  eval->add_option("--gammas", gammas, "Comma-separated adaptive thresholds")->delimiter(',');
  eval->add_option("--n", single_n, "Fixed budget per prompt");
  eval->add_option("--n-list", cfg.n_list, "Comma-separated fixed budgets")->delimiter(',');
  eval->add_option("--n-max", cfg.n_max, "Adaptive cap on draws per prompt");
  eval->add_option("--mc-samples", cfg.mc_samples, "Importance samples per support hypothesis");
  eval->add_option("--seed", seed, "Random seed");
  eval->add_option("--train-count", cfg.train_count, "Leading prompts used for training");
  eval->add_option("--estimators", estimator_names, "Comma-separated estimator names")
      ->delimiter(',');
  eval->add_option("--bootstrap-reps", cfg.bootstrap_reps, "Bootstrap resamples per row");
  eval->add_flag("--strict-support", cfg.strict_support, "Condition on K > k_min");
  eval->add_flag("--no-constraints", cfg.no_constraints, "Ignore sequence-probability bounds");
  add_common(eval);

  std::string family = "dirichlet";
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with known entropy");
  synth->add_option("--prompts", cfg.synth.num_prompts, "Number of prompts");
  synth->add_option("--family", family, "dirichlet | zipf | fixed")
      ->check(CLI::IsMember({"dirichlet", "zipf", "fixed"}));
  synth->add_option("--concentration", cfg.synth.concentration, "Dirichlet concentration");
  synth->add_option("--zipf-exponent", cfg.synth.zipf_exponent, "Zipf exponent");
  synth->add_option("--probs", cfg.synth.fixed_probs, "Fixed meaning distribution")
      ->delimiter(',');
  synth->add_option("--min-meanings", cfg.synth.min_meanings, "Fewest meanings per prompt");
  synth->add_option("--max-meanings", cfg.synth.max_meanings, "Most meanings per prompt");
  synth->add_option("--variants", cfg.synth.variants_per_meaning, "Distinct texts per meaning");
  synth->add_option("--split-ratio", cfg.synth.split_ratio, "Geometric split of meaning mass");
  synth->add_option("--pool-size", cfg.synth.pool_size, "Samples per prompt");
  synth->add_option("--label-threshold", cfg.synth.label_threshold,
                    "Hallucination threshold on true entropy (median if unset)");
  synth->add_option("--seed", seed, "Random seed");
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << nlohmann::json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  cfg.command = active->get_name();
  try {
    if (auto* opt = active->get_option_no_throw("--seed"); opt && opt->count() > 0) cfg.seed = seed;
    if (cfg.command == "evaluate") {
      if (single_n) cfg.n_list.insert(cfg.n_list.begin(), *single_n);
      cfg.gammas = gammas;
      if (cfg.gamma) cfg.gammas.insert(cfg.gammas.begin(), *cfg.gamma);
      if (cfg.n_list.empty() && cfg.gammas.empty())
        for (std::size_t n = 1; n <= 10; ++n) cfg.n_list.push_back(n);
      for (const auto& name : estimator_names) cfg.estimators.push_back(parse_estimator(name));
      cmd_evaluate(cfg, &err);
    } else if (cfg.command == "fit-prior") {
      cmd_fit_prior(cfg);
    } else {
      cfg.synth.family = family == "zipf"    ? MeaningFamily::Zipf
                         : family == "fixed" ? MeaningFamily::Fixed
                                             : MeaningFamily::Dirichlet;
      cmd_synth(cfg);
    }
  } catch (const UsageError& e) {
    err << nlohmann::json{{"error", e.what()}, {"kind", "usage"}, {"command", cfg.command}}.dump()
        << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", e.what()}, {"kind", "runtime"}, {"command", cfg.command}}
               .dump()
        << "\n";
    return 1;
  }
  out << "wrote " << cfg.out.string() << "\n";
  return 0;
}

}  // namespace entroscope::cli
