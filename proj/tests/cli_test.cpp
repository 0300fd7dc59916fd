#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entroscope/cli.hpp"
#include "entroscope/data_model.hpp"

namespace fs = std::filesystem;
using namespace entroscope;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "entroscope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PromptRecord prompt_with(const std::string& id, int meanings) {
  PromptRecord p;
  p.prompt_id = id;
  for (int j = 0; j < meanings; ++j)
    p.samples.push_back({"t" + std::to_string(j), j, std::log(0.9 / meanings), 0.0});
  p.low_temp_log_prob = -0.1;
  p.p_true = 0.5;
  return p;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("entroscope_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string synth(std::size_t prompts, std::size_t pool = 30) {
    const std::string out = path("data.jsonl");
    const auto r = run_cli({"synth", "--prompts", std::to_string(prompts), "--pool-size",
                            std::to_string(pool), "--seed", "4", "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitPriorWritesRelativeFrequencies) {
  const std::vector<PromptRecord> prompts{prompt_with("a", 2), prompt_with("b", 2),
                                          prompt_with("c", 3), prompt_with("d", 5),
                                          prompt_with("e", 6)};
  write_dataset(path("d.jsonl"), prompts);
  const auto r = run_cli({"fit-prior", "--dataset", path("d.jsonl"), "--train-count", "4",
                          "--out", path("prior.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("prior.json")));
  EXPECT_DOUBLE_EQ(j.at("weights").at("2").get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j.at("weights").at("3").get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j.at("weights").at("5").get<double>(), 0.25);
  EXPECT_FALSE(j.at("weights").contains("6"));
  EXPECT_TRUE(fs::exists(path("prior.json.manifest.json")));
}

TEST_F(Cli, TrainCountBeyondDatasetIsUsageError) {
  write_dataset(path("d.jsonl"), {prompt_with("a", 2)});
  const auto r = run_cli({"fit-prior", "--dataset", path("d.jsonl"), "--train-count", "5",
                          "--out", path("prior.json")});
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("kind"), "usage");
  EXPECT_FALSE(fs::exists(path("prior.json")));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({"synth", "--out", path("x.jsonl")}).code, 2);  // seed required
  EXPECT_EQ(run_cli({"fit-prior", "--dataset", path("missing.jsonl"), "--out", path("p.json")}).code,
            2);
  EXPECT_EQ(run_cli({"synth", "--seed", "1", "--out", "/no/such/dir/x.jsonl"}).code, 2);
}

TEST_F(Cli, MalformedDatasetIsRuntimeError) {
  std::ofstream(path("bad.jsonl")) << "{\"prompt_id\": \"a\", \"samples\": []}\n";
  const auto r = run_cli({"fit-prior", "--dataset", path("bad.jsonl"), "--out", path("p.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST_F(Cli, EvaluateIsByteIdenticalAcrossRuns) {
  const std::string data = synth(30);
  const std::vector<std::string> base{"evaluate", "--dataset", data, "--train-count", "10",
                                      "--n-list", "1,2", "--gammas", "0.1", "--seed", "9",
                                      "--mc-samples", "300", "--n-max", "5",
                                      "--bootstrap-reps", "50"};
  auto args = base;
  args.insert(args.end(), {"--out", path("a.csv")});
  ASSERT_EQ(run_cli(args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", path("b.csv")});
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_FALSE(slurp(path("a.csv")).empty());
}

TEST_F(Cli, SingleSampleBaselinesScoreHalf) {
  const std::string data = synth(40);
  const auto r = run_cli({"evaluate", "--dataset", data, "--train-count", "10", "--n", "1",
                          "--estimators", "histogram,rescaled,rescaled_h", "--seed", "3",
                          "--bootstrap-reps", "20", "--out", path("n1.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = nlohmann::json::parse(slurp(path("n1.json")));
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.at("auroc").get<double>(), 0.5) << row.at("estimator");
    EXPECT_EQ(row.at("n_or_avg_n").get<double>(), 1.0);
  }
}

TEST_F(Cli, GammaSweepRows) {
  const std::string data = synth(30);
  const auto r = run_cli({"evaluate", "--dataset", data, "--train-count", "10", "--gammas",
                          "0.5,0.1,0.02", "--seed", "3", "--mc-samples", "300", "--n-max", "8",
                          "--bootstrap-reps", "20", "--out", path("sweep.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = nlohmann::json::parse(slurp(path("sweep.json")));
  ASSERT_EQ(rows.size(), 3u);
  double prev = 0.0;
  for (const auto& row : rows) {
    EXPECT_EQ(row.at("estimator"), "bayes_adaptive");
    EXPECT_GE(row.at("n_or_avg_n").get<double>(), prev);
    prev = row.at("n_or_avg_n").get<double>();
  }
}

TEST_F(Cli, EvaluateUsesProvidedPrior) {
  const std::string data = synth(20);
  std::ofstream(path("prior.json")) << R"({"version": 1, "weights": {"6": 1.0}})";
  const auto r = run_cli({"evaluate", "--dataset", data, "--prior", path("prior.json"),
                          "--train-count", "0", "--n", "2", "--estimators", "bayes", "--seed",
                          "1", "--mc-samples", "200", "--bootstrap-reps", "20", "--out",
                          path("o.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(slurp(path("o.csv.manifest.json")));
  EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 1u);
  EXPECT_EQ(manifest.at("train_count").get<std::size_t>(), 0u);
}

TEST_F(Cli, SynthFixedFamilyHasKnownEntropy) {
  const auto r = run_cli({"synth", "--prompts", "4", "--family", "fixed", "--probs", "0.5,0.5",
                          "--seed", "2", "--out", path("fixed.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto prompts = load_dataset(path("fixed.jsonl"));
  ASSERT_EQ(prompts.size(), 4u);
  for (const auto& p : prompts) EXPECT_NEAR(*p.true_se, std::log(2.0), 1e-12);
  ASSERT_EQ(run_cli({"synth", "--prompts", "4", "--family", "fixed", "--probs", "0.5,0.5",
                     "--seed", "2", "--out", path("again.jsonl")})
                .code,
            0);
  EXPECT_EQ(slurp(path("fixed.jsonl")), slurp(path("again.jsonl")));
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = ENTROSCOPE_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(std::system((bin + " --help" + quiet).c_str()), 0);
  const int bad = std::system((bin + " evaluate --dataset /nonexistent --out x.csv" + quiet).c_str());
  ASSERT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), 2);
  const int ok = std::system(
      (bin + " synth --prompts 3 --seed 1 --out " + path("bin.jsonl") + quiet).c_str());
  EXPECT_EQ(ok, 0);
  EXPECT_TRUE(fs::exists(path("bin.jsonl")));
}
