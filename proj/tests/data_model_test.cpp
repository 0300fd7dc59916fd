#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>

#include "entroscope/data_model.hpp"
#include "entroscope/entropy.hpp"

using namespace entroscope;

namespace {

PromptRecord paris_rome() {
  PromptRecord p;
  p.prompt_id = "capital";
  p.samples = {{"Paris", 7, std::log(0.6), std::log(0.6)},
               {"It's Paris", 7, std::log(0.1), std::log(0.1) / 3},
               {"Rome", 3, std::log(0.1), std::log(0.1)}};
  p.low_temp_log_prob = std::log(0.6);
  p.p_true = 0.8;
  p.label = 1;
  return p;
}

}  // namespace

TEST(DataModel, RelabelsDenselyInSortedOrder) {
  PromptRecord p = paris_rome();
  validate_prompt(p);
  EXPECT_EQ(p.samples[0].meaning, 1);
  EXPECT_EQ(p.samples[1].meaning, 1);
  EXPECT_EQ(p.samples[2].meaning, 0);
  EXPECT_EQ(p.source_meanings, (std::vector<int>{3, 7}));
  EXPECT_EQ(p.support_size(), 2u);
}

TEST(DataModel, ValidationIsIdempotent) {
  PromptRecord p = paris_rome();
  validate_prompt(p);
  PromptRecord again = p;
  validate_prompt(again);
  EXPECT_EQ(p, again);
}

TEST(DataModel, JsonRoundTripPreservesRecords) {
  PromptRecord p = paris_rome();
  validate_prompt(p);
  p.true_se = 0.42;
  const auto parsed = parse_dataset(serialize_dataset({p}));
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], p);

  PromptRecord bare = paris_rome();
  bare.low_temp_log_prob.reset();
  bare.p_true.reset();
  validate_prompt(bare);
  const auto j = prompt_to_json(bare);
  EXPECT_FALSE(j.contains("p_true"));
  EXPECT_FALSE(j.contains("low_temp_log_prob"));
  EXPECT_EQ(parse_dataset(j.dump())[0], bare);
}

TEST(DataModel, FileRoundTrip) {
  const auto data = generate_synthetic(SyntheticSpec{}, 5).prompts;
  const auto path = std::filesystem::temp_directory_path() / "entroscope_roundtrip.jsonl";
  write_dataset(path, data);
  EXPECT_EQ(load_dataset(path), data);
  std::filesystem::remove(path);
}

TEST(DataModel, RejectsExcessDistinctMass) {
  PromptRecord p = paris_rome();
  p.samples = {{"a", 0, std::log(0.52), 0.0}, {"b", 1, std::log(0.50), 0.0}};
  try {
    validate_prompt(p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("capital"), std::string::npos);
    EXPECT_NE(msg.find("log_prob"), std::string::npos);
  }
}

TEST(DataModel, DuplicateTextsCountMassOnce) {
  PromptRecord p = paris_rome();
  p.samples.push_back(p.samples[0]);
  p.samples.push_back(p.samples[0]);
  EXPECT_NO_THROW(validate_prompt(p));
}

TEST(DataModel, MassWithinToleranceAccepted) {
  PromptRecord p = paris_rome();
  p.samples = {{"a", 0, std::log(0.5 + 4e-7), 0.0}, {"b", 1, std::log(0.5), 0.0}};
  EXPECT_NO_THROW(validate_prompt(p));
}

TEST(DataModel, FieldValidation) {
  auto expect_bad = [](auto mutate) {
    PromptRecord p = paris_rome();
    mutate(p);
    EXPECT_THROW(validate_prompt(p), DataError);
  };
  expect_bad([](PromptRecord& p) { p.samples.clear(); });
  expect_bad([](PromptRecord& p) { p.samples[0].meaning = -1; });
  expect_bad([](PromptRecord& p) { p.samples[0].log_prob = 0.1; });
  expect_bad([](PromptRecord& p) { p.samples[0].log_prob = NAN; });
  expect_bad([](PromptRecord& p) { p.p_true = 1.5; });
  expect_bad([](PromptRecord& p) { p.low_temp_log_prob = 0.5; });
  expect_bad([](PromptRecord& p) { p.label = 2; });
  expect_bad([](PromptRecord& p) { p.samples[2].text = "Paris"; });
}

TEST(DataModel, ParseErrorsCarryLineNumbers) {
  const std::string good = prompt_to_json(paris_rome()).dump();
  try {
    parse_dataset(good + "\n{not json}\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    parse_dataset(good + "\n" + R"({"prompt_id":"x","samples":[]})");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_dataset(R"({"samples":[]})"), DataError);
  EXPECT_THROW(load_dataset("/nonexistent/file.jsonl"), DataError);
}

TEST(DataModel, SubsampleIsDeterministicAndPrefixConsistent) {
  PromptRecord p = paris_rome();
  validate_prompt(p);
  const auto a = subsample(p, 50, 9);
  const auto b = subsample(p, 50, 9);
  const auto prefix = subsample(p, 10, 9);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.stream_seed, b.stream_seed);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(prefix.records[i], a.records[i]);
  EXPECT_NE(subsample(p, 50, 10).records, a.records);
  EXPECT_THROW(subsample(p, 0, 9), std::invalid_argument);
}

TEST(DataModel, SubsampleDrawsUniformlyFromPool) {
  // Each of the three pool entries has probability 1/3 per draw.
  PromptRecord p = paris_rome();
  validate_prompt(p);
  const std::size_t n = 30000;
  const auto batch = subsample(p, n, 123);
  std::size_t rome = 0;
  for (const auto& r : batch.records) rome += r.text == "Rome";
  const double se = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  EXPECT_NEAR(static_cast<double>(rome), n / 3.0, 4 * se);
}

TEST(DataModel, CountMeanings) {
  PromptRecord p = paris_rome();
  validate_prompt(p);
  SampleBatch batch;
  batch.records = {p.samples[0], p.samples[1], p.samples[0], p.samples[2]};
  const auto counts = count_meanings(batch);
  EXPECT_EQ(counts.total, 4u);
  EXPECT_EQ(counts.distinct(), 2u);
  EXPECT_EQ(counts.by_meaning.at(1), 3u);
  EXPECT_EQ(counts.by_meaning.at(0), 1u);
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec spec;
  spec.num_prompts = 20;
  EXPECT_EQ(serialize_dataset(generate_synthetic(spec, 3).prompts),
            serialize_dataset(generate_synthetic(spec, 3).prompts));
  EXPECT_NE(serialize_dataset(generate_synthetic(spec, 3).prompts),
            serialize_dataset(generate_synthetic(spec, 4).prompts));
}

TEST(Synthetic, TruthMatchesMeaningDistribution) {
  SyntheticSpec spec;
  spec.num_prompts = 40;
  const auto data = generate_synthetic(spec, 11);
  ASSERT_EQ(data.prompts.size(), 40u);
  for (std::size_t i = 0; i < data.prompts.size(); ++i) {
    const auto& p = data.prompts[i];
    const auto& probs = data.meaning_probs[i];
    EXPECT_GE(probs.size(), spec.min_meanings);
    EXPECT_LE(probs.size(), spec.max_meanings);
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
    EXPECT_NEAR(shannon_entropy(probs), data.true_se[i], 1e-12);
    ASSERT_TRUE(p.true_se.has_value());
    EXPECT_DOUBLE_EQ(*p.true_se, data.true_se[i]);
    EXPECT_EQ(p.samples.size(), spec.pool_size);
    EXPECT_TRUE(p.p_true.has_value());
    EXPECT_TRUE(p.low_temp_log_prob.has_value());
    PromptRecord copy = p;
    EXPECT_NO_THROW(validate_prompt(copy));
  }
  int positives = 0;
  for (const auto& p : data.prompts) positives += p.label;
  EXPECT_EQ(positives, 20);
}

TEST(Synthetic, FixedFamilyReproducesEntropy) {
  SyntheticSpec spec;
  spec.num_prompts = 3;
  spec.family = MeaningFamily::Fixed;
  spec.fixed_probs = {0.5, 0.5};
  const auto data = generate_synthetic(spec, 1);
  for (double h : data.true_se) EXPECT_NEAR(h, std::log(2.0), 1e-12);
}

TEST(Synthetic, SpecValidation) {
  SyntheticSpec spec;
  spec.min_meanings = 5;
  spec.max_meanings = 3;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  SyntheticSpec fixed;
  fixed.family = MeaningFamily::Fixed;
  fixed.fixed_probs = {0.5, 0.4};
  EXPECT_THROW(fixed.validate(), std::invalid_argument);
}
