#include "entroscope/support_belief.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace entroscope {

SupportPrior::SupportPrior(std::map<std::size_t, double> weights) {
  double total = 0.0;
  for (const auto& [k, w] : weights) {
    if (k == 0) throw std::invalid_argument("support size must be at least 1");
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("support weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("support prior has no mass");
  for (const auto& [k, w] : weights) {
    if (w > 0.0) weights_.emplace(k, w / total);
  }
}

SupportPrior SupportPrior::point_mass(std::size_t support) {
  return SupportPrior({{support, 1.0}});
}

double SupportPrior::weight(std::size_t support) const {
  auto it = weights_.find(support);
  return it == weights_.end() ? 0.0 : it->second;
}

nlohmann::json SupportPrior::to_json() const {
  nlohmann::json w = nlohmann::json::object();
  for (const auto& [k, v] : weights_) w[std::to_string(k)] = v;
  return {{"version", kPriorFileVersion}, {"weights", w}};
}

SupportPrior SupportPrior::from_json(const nlohmann::json& j) {
  if (!j.contains("weights")) throw DataError("prior file is missing 'weights'");
  if (j.contains("version") && j.at("version").get<int>() > kPriorFileVersion)
    throw DataError("unsupported prior file version");
  std::map<std::size_t, double> weights;
  for (const auto& [key, value] : j.at("weights").items()) {
    std::size_t k = 0;
    const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
    if (ec != std::errc() || end != key.data() + key.size() || key.empty())
      throw DataError("bad support size key '" + key + "'");
    weights[k] = value.get<double>();
  }
  return SupportPrior(std::move(weights));
}

SupportPrior fit_support_prior(std::span<const PromptRecord> training, double smoothing) {
  if (training.empty()) throw std::invalid_argument("cannot fit a support prior on no prompts");
  if (smoothing < 0.0) throw std::invalid_argument("smoothing must be nonnegative");
  std::map<std::size_t, double> counts;
  for (const PromptRecord& p : training) {
    std::set<int> meanings;
    for (const SampleRecord& s : p.samples) meanings.insert(s.meaning);
    counts[meanings.size()] += 1.0;
  }
  if (smoothing > 0.0) {
    const std::size_t max_k = counts.rbegin()->first;
    for (std::size_t k = 1; k <= max_k; ++k) counts[k] += smoothing;
  }
  return SupportPrior(std::move(counts));
}

SupportPrior condition_support(const SupportPrior& prior, std::size_t k_min,
                               SupportConditioning mode) {
  const std::size_t lowest = mode == SupportConditioning::Strict ? k_min + 1 : k_min;
  std::map<std::size_t, double> kept(prior.weights().lower_bound(lowest),
                                     prior.weights().end());
  if (kept.empty()) return SupportPrior::point_mass(std::max<std::size_t>(k_min, 1));
  return SupportPrior(std::move(kept));
}

EntropyBelief aggregate_over_support(const SupportPrior& conditioned,
                                     const std::map<std::size_t, ConditionalEntropy>& per_support) {
  EntropyBelief belief;
  double mean = 0.0, within = 0.0;
  for (const auto& [k, w] : conditioned.weights()) {
    auto it = per_support.find(k);
    if (it == per_support.end())
      throw std::invalid_argument("no entropy moments for support K=" + std::to_string(k));
    mean += w * it->second.mean;
    within += w * it->second.variance;
    belief.per_support.push_back({k, w, it->second.mean, it->second.variance});
  }
  double between = 0.0;
  for (const SupportComponent& c : belief.per_support) {
    const double d = c.mean - mean;
    between += c.weight * d * d;
  }
  belief.mean = mean;
  belief.variance = within + between;
  return belief;
}

}  // namespace entroscope
