#include "entroscope/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "entroscope/entropy.hpp"
#include "entroscope/rng.hpp"

namespace entroscope {

namespace {

[[noreturn]] void prompt_error(const std::string& prompt_id,
                               const std::string& field,
                               const std::string& what) {
  throw DataError("prompt '" + prompt_id + "': field '" + field + "': " + what);
}

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// Exact cumulative sampling over a fixed weight vector.
std::size_t draw_categorical(Rng& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> draw_meaning_distribution(const SyntheticSpec& spec,
                                              Rng& rng) {
  if (spec.family == MeaningFamily::Fixed) return normalized(spec.fixed_probs);
  const std::size_t k =
      spec.min_meanings +
      uniform_index(rng, spec.max_meanings - spec.min_meanings + 1);
  std::vector<double> w(k);
  if (spec.family == MeaningFamily::Zipf) {
    for (std::size_t j = 0; j < k; ++j)
      w[j] = std::pow(static_cast<double>(j + 1), -spec.zipf_exponent);
  } else {
    std::gamma_distribution<double> gamma(spec.concentration, 1.0);
    for (double& v : w) {
      do {
        v = gamma(rng);
      } while (v <= 0.0);
    }
  }
  return normalized(std::move(w));
}

}  // namespace

double SampleRecord::probability() const { return std::exp(log_prob); }

void validate_prompt(PromptRecord& prompt) {
  const std::string& id = prompt.prompt_id;
  if (id.empty()) prompt_error("<unnamed>", "prompt_id", "must be non-empty");
  if (prompt.samples.empty()) prompt_error(id, "samples", "must be non-empty");

  std::vector<int> labels;
  std::unordered_map<std::string, const SampleRecord*> by_text;
  double distinct_mass = 0.0;
  for (const SampleRecord& s : prompt.samples) {
    if (s.meaning < 0) prompt_error(id, "meaning", "negative label");
    if (!std::isfinite(s.log_prob) || s.log_prob > 0.0)
      prompt_error(id, "log_prob", "must be finite and <= 0");
    if (!std::isfinite(s.log_prob_len_norm))
      prompt_error(id, "log_prob_len_norm", "must be finite");
    auto [it, inserted] = by_text.emplace(s.text, &s);
    if (inserted) {
      distinct_mass += s.probability();
    } else if (it->second->meaning != s.meaning) {
      prompt_error(id, "meaning",
                   "text '" + s.text + "' carries two different meanings");
    }
    labels.push_back(s.meaning);
  }
  if (distinct_mass > 1.0 + kMassTolerance) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "distinct-text probability mass " << distinct_mass << " exceeds 1";
    prompt_error(id, "log_prob", msg.str());
  }
  if (prompt.p_true && !(*prompt.p_true >= 0.0 && *prompt.p_true <= 1.0))
    prompt_error(id, "p_true", "must lie in [0, 1]");
  if (prompt.low_temp_log_prob && !(*prompt.low_temp_log_prob <= 0.0))
    prompt_error(id, "low_temp_log_prob", "must be <= 0");
  if (prompt.label != 0 && prompt.label != 1)
    prompt_error(id, "label", "must be 0 or 1");

  // Dense relabeling in ascending order of the incoming labels. Already-dense
  // prompts map to themselves, which keeps reloading idempotent.
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<int> source(labels.size());
  if (!prompt.source_meanings.empty() && labels.back() < static_cast<int>(labels.size()) &&
      prompt.source_meanings.size() == labels.size()) {
    // Already dense with a recorded mapping (e.g. after a round trip).
    return;
  }
  for (std::size_t j = 0; j < labels.size(); ++j) source[j] = labels[j];
  for (SampleRecord& s : prompt.samples) {
    s.meaning = static_cast<int>(
        std::lower_bound(labels.begin(), labels.end(), s.meaning) - labels.begin());
  }
  prompt.source_meanings = std::move(source);
}

PromptRecord prompt_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  PromptRecord p;
  p.prompt_id = required<std::string>(j, "prompt_id");
  if (j.contains("version") && j.at("version").get<int>() > kSchemaVersion)
    throw DataError("unsupported schema version " +
                    std::to_string(j.at("version").get<int>()));
  for (const auto& s : required<nlohmann::json>(j, "samples")) {
    SampleRecord r;
    r.text = required<std::string>(s, "text");
    r.meaning = required<int>(s, "meaning");
    r.log_prob = required<double>(s, "log_prob");
    r.log_prob_len_norm =
        s.contains("log_prob_len_norm") ? s.at("log_prob_len_norm").get<double>()
                                        : r.log_prob;
    p.samples.push_back(std::move(r));
  }
  p.low_temp_log_prob = optional_number(j, "low_temp_log_prob");
  p.p_true = optional_number(j, "p_true");
  p.label = j.contains("label") ? j.at("label").get<int>() : 0;
  p.true_se = optional_number(j, "true_se");
  if (j.contains("source_meanings"))
    p.source_meanings = j.at("source_meanings").get<std::vector<int>>();
  return p;
}

nlohmann::json prompt_to_json(const PromptRecord& prompt) {
  nlohmann::json j;
  j["version"] = kSchemaVersion;
  j["prompt_id"] = prompt.prompt_id;
  nlohmann::json samples = nlohmann::json::array();
  for (const SampleRecord& s : prompt.samples) {
    samples.push_back({{"text", s.text},
                       {"meaning", s.meaning},
                       {"log_prob", s.log_prob},
                       {"log_prob_len_norm", s.log_prob_len_norm}});
  }
  j["samples"] = std::move(samples);
  if (prompt.low_temp_log_prob) j["low_temp_log_prob"] = *prompt.low_temp_log_prob;
  if (prompt.p_true) j["p_true"] = *prompt.p_true;
  j["label"] = prompt.label;
  if (prompt.true_se) j["true_se"] = *prompt.true_se;
  if (!prompt.source_meanings.empty()) j["source_meanings"] = prompt.source_meanings;
  return j;
}

std::vector<PromptRecord> parse_dataset(std::string_view contents) {
  std::vector<PromptRecord> prompts;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    const std::size_t end = std::min(contents.find('\n', pos), contents.size());
    const std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == contents.size()) break;
      continue;
    }
    PromptRecord p;
    try {
      p = prompt_from_json(nlohmann::json::parse(line));
      validate_prompt(p);
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    prompts.push_back(std::move(p));
    if (end == contents.size()) break;
  }
  return prompts;
}

std::vector<PromptRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::string serialize_dataset(const std::vector<PromptRecord>& prompts) {
  std::string out;
  for (const PromptRecord& p : prompts) {
    out += prompt_to_json(p).dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<PromptRecord>& prompts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  out << serialize_dataset(prompts);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::uint64_t prompt_stream_seed(std::uint64_t seed, std::string_view prompt_id) {
  return derive_seed(seed, prompt_id);
}

SampleBatch subsample(const PromptRecord& prompt, std::size_t n,
                      std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("subsample: n must be positive");
  if (prompt.samples.empty())
    throw DataError("prompt '" + prompt.prompt_id + "' has an empty pool");
  SampleBatch batch;
  batch.prompt_id = prompt.prompt_id;
  batch.stream_seed = prompt_stream_seed(seed, prompt.prompt_id);
  Rng rng(derive_seed(batch.stream_seed, "draws"));
  batch.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    batch.records.push_back(prompt.samples[uniform_index(rng, prompt.samples.size())]);
  return batch;
}

MeaningCounts count_meanings(const SampleBatch& batch) {
  MeaningCounts counts;
  for (const SampleRecord& r : batch.records) ++counts.by_meaning[r.meaning];
  counts.total = batch.records.size();
  return counts;
}

void SyntheticSpec::validate() const {
  if (num_prompts == 0) throw std::invalid_argument("synthetic: num_prompts must be positive");
  if (pool_size == 0) throw std::invalid_argument("synthetic: pool_size must be positive");
  if (variants_per_meaning == 0)
    throw std::invalid_argument("synthetic: variants_per_meaning must be positive");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0))
    throw std::invalid_argument("synthetic: split_ratio must lie in (0, 1]");
  if (family == MeaningFamily::Fixed) {
    if (fixed_probs.empty())
      throw std::invalid_argument("synthetic: fixed family needs at least one meaning");
    double total = 0.0;
    for (double p : fixed_probs) {
      if (!(p > 0.0)) throw std::invalid_argument("synthetic: fixed probabilities must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("synthetic: fixed probabilities must sum to 1");
  } else {
    if (min_meanings == 0 || max_meanings < min_meanings)
      throw std::invalid_argument("synthetic: need 1 <= min_meanings <= max_meanings");
    if (family == MeaningFamily::Dirichlet && !(concentration > 0.0))
      throw std::invalid_argument("synthetic: concentration must be positive");
  }
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticDataset out;
  out.prompts.reserve(spec.num_prompts);

  std::vector<double> variant_split(spec.variants_per_meaning);
  for (std::size_t k = 0; k < variant_split.size(); ++k)
    variant_split[k] = std::pow(spec.split_ratio, static_cast<double>(k));
  variant_split = normalized(std::move(variant_split));

  for (std::size_t i = 0; i < spec.num_prompts; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "synth-%05zu", i);
    Rng rng(derive_seed(seed, std::string_view(id)));

    std::vector<double> meaning_p = draw_meaning_distribution(spec, rng);

    // Enumerate the whole sequence space: meaning j, variant k.
    struct Sequence {
      SampleRecord record;
      double prob;
    };
    std::vector<Sequence> sequences;
    std::vector<double> cumulative;
    double running = 0.0;
    for (std::size_t j = 0; j < meaning_p.size(); ++j) {
      for (std::size_t k = 0; k < variant_split.size(); ++k) {
        const double prob = meaning_p[j] * variant_split[k];
        const double tokens = 3.0 + static_cast<double>(k) +
                              static_cast<double>(uniform_index(rng, 6));
        SampleRecord r;
        r.text = "m" + std::to_string(j) + " v" + std::to_string(k);
        r.meaning = static_cast<int>(j);
        r.log_prob = std::min(0.0, std::log(prob));
        r.log_prob_len_norm = r.log_prob / tokens;
        running += prob;
        cumulative.push_back(running);
        sequences.push_back({std::move(r), prob});
      }
    }

    PromptRecord p;
    p.prompt_id = id;
    for (std::size_t s = 0; s < spec.pool_size; ++s)
      p.samples.push_back(sequences[draw_categorical(rng, cumulative)].record);

    const auto mode = std::max_element(
        sequences.begin(), sequences.end(),
        [](const Sequence& a, const Sequence& b) { return a.prob < b.prob; });
    p.low_temp_log_prob = mode->record.log_prob;
    // Surrogate self-evaluation: modal meaning mass plus noise.
    std::normal_distribution<double> noise(0.0, 0.15);
    const double modal = *std::max_element(meaning_p.begin(), meaning_p.end());
    p.p_true = std::clamp(modal + noise(rng), 0.0, 1.0);
    const double se = shannon_entropy(meaning_p);
    p.true_se = se;

    validate_prompt(p);
    out.true_se.push_back(se);
    out.meaning_probs.push_back(std::move(meaning_p));
    out.prompts.push_back(std::move(p));
  }

  double threshold;
  if (spec.label_threshold) {
    threshold = *spec.label_threshold;
  } else {
    std::vector<double> sorted = out.true_se;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    threshold = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  for (std::size_t i = 0; i < out.prompts.size(); ++i)
    out.prompts[i].label = out.true_se[i] > threshold ? 1 : 0;
  return out;
}

}  // namespace entroscope
