#include "entroscope/truncated_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "entroscope/entropy.hpp"

namespace entroscope {

namespace {

constexpr double kDensityFloor = 1e-300;

}  // namespace

LowerBounds make_lower_bounds(std::vector<double> bounds) {
  if (bounds.empty()) throw std::invalid_argument("lower bounds need at least one meaning");
  LowerBounds lb;
  for (double b : bounds) {
    if (!(b >= 0.0) || !std::isfinite(b))
      throw std::invalid_argument("lower bounds must be finite and nonnegative");
  }
  lb.covered_mass = std::accumulate(bounds.begin(), bounds.end(), 0.0);
  if (lb.covered_mass > 1.0 + kMassTolerance)
    throw std::invalid_argument("covered probability mass " +
                                std::to_string(lb.covered_mass) + " exceeds 1");
  if (lb.covered_mass > 1.0) {
    const double scale = kRescaledCoveredMass / lb.covered_mass;
    for (double& b : bounds) b *= scale;
    lb.covered_mass = std::accumulate(bounds.begin(), bounds.end(), 0.0);
    lb.rescaled = true;
  }
  lb.bounds = std::move(bounds);
  return lb;
}

std::vector<int> observed_meanings(const SampleBatch& batch) {
  std::vector<int> labels;
  labels.reserve(batch.records.size());
  for (const SampleRecord& r : batch.records) labels.push_back(r.meaning);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

LowerBounds build_constraints(const SampleBatch& batch, std::size_t support) {
  const std::vector<int> labels = observed_meanings(batch);
  if (support < labels.size())
    throw std::invalid_argument("support " + std::to_string(support) +
                                " is smaller than the " + std::to_string(labels.size()) +
                                " observed meanings");
  std::vector<double> bounds(support, 0.0);
  std::unordered_set<std::string_view> seen;
  for (const SampleRecord& r : batch.records) {
    if (!seen.insert(r.text).second) continue;
    const auto slot = std::lower_bound(labels.begin(), labels.end(), r.meaning) - labels.begin();
    bounds[static_cast<std::size_t>(slot)] += r.probability();
  }
  return make_lower_bounds(std::move(bounds));
}

TruncatedSimplexSampler::TruncatedSimplexSampler(const LowerBounds& bounds)
    : bounds_(bounds.bounds), free_mass_(std::max(0.0, 1.0 - bounds.covered_mass)) {}

void TruncatedSimplexSampler::draw(Rng& rng, std::span<double> out) const {
  double total = 0.0;
  for (double& e : out) {
    e = -std::log(uniform01(rng));
    total += e;
  }
  const double scale = free_mass_ / total;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = bounds_[j] + scale * out[j];
}

std::vector<std::vector<double>> sample_truncated_uniform(const LowerBounds& bounds,
                                                          std::size_t m,
                                                          std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("sample_truncated_uniform: m must be positive");
  const TruncatedSimplexSampler sampler(bounds);
  Rng rng(seed);
  std::vector<std::vector<double>> samples(m, std::vector<double>(bounds.size()));
  for (auto& b : samples) sampler.draw(rng, b);
  return samples;
}

TruncatedMoments snis_entropy_moments(const DirichletParams& params,
                                      const LowerBounds& bounds, std::size_t m,
                                      std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("snis_entropy_moments: m must be positive");
  if (params.size() != bounds.size())
    throw std::invalid_argument("Dirichlet and bound dimensions differ");

  TruncatedMoments out;
  out.mc_samples = m;

  if (bounds.covered_mass >= 1.0) {
    // The constrained region is the single point b = bounds.
    out.mean = shannon_entropy(bounds.bounds);
    out.second_moment = out.mean * out.mean;
    out.variance = 0.0;
    out.effective_sample_size = std::numeric_limits<double>::infinity();
    return out;
  }

  const std::size_t k = params.size();
  const TruncatedSimplexSampler sampler(bounds);
  Rng rng(seed);
  std::vector<double> b(k);
  // Holds log-weights until normalisation, then the weights themselves.
  std::vector<double> weight(m), h(m);
  for (std::size_t i = 0; i < m; ++i) {
    sampler.draw(rng, b);
    // Unnormalised Dirichlet log-density; the proposal density and the
    // truncation constant are common to all samples and cancel.
    double lw = 0.0;
    double ent = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double lb = std::log(std::max(b[j], kDensityFloor));
      lw += (params[j] - 1.0) * lb;
      ent -= b[j] * lb;
    }
    weight[i] = lw;
    h[i] = ent;
  }

  const double max_lw = *std::max_element(weight.begin(), weight.end());
  if (!std::isfinite(max_lw))
    throw std::runtime_error("importance weights are not finite; proposal unusable");
  double sum_w = 0.0, sum_w2 = 0.0, sum_wh = 0.0, sum_wh2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::exp(weight[i] - max_lw);
    weight[i] = w;
    sum_w += w;
    sum_w2 += w * w;
    sum_wh += w * h[i];
    sum_wh2 += w * h[i] * h[i];
  }
  if (!(sum_w > 0.0)) throw std::runtime_error("all importance weights underflowed");

  out.mean = sum_wh / sum_w;
  out.second_moment = sum_wh2 / sum_w;
  out.variance = std::max(0.0, out.second_moment - out.mean * out.mean);
  out.effective_sample_size = sum_w * sum_w / sum_w2;
  double se2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double wn = weight[i] / sum_w;
    const double d = h[i] - out.mean;
    se2 += wn * wn * d * d;
  }
  out.mean_std_error = std::sqrt(se2);
  return out;
}

}  // namespace entroscope
