#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "toxpipe/cli.hpp"

using namespace toxpipe;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::vector<const char*> argv{"toxpipe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> small_model_flags() {
  return {"--vocab-size", "40",    "--embed-dim",    "4",           "--max-len",      "12",
          "--lstm1-units", "3",    "--lstm2-units",  "3",           "--head-input",   "final_state",
          "--dense1-units", "6",   "--dense2-units", "4",           "--epochs",       "2",
          "--batch-size",  "16",   "--seed",         "7",           "--slang",        ""};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    csv_ = (dir_ / "data.csv").string();
    write_csv(std::filesystem::path(csv_), support::keyword_corpus(90, 1));
  }
  std::vector<std::string> train_args(const std::string& out_dir) const {
    std::vector<std::string> a{"train", "--data", csv_, "--out-dir", out_dir};
    for (auto& f : small_model_flags()) a.push_back(f);
    return a;
  }
  support::TempDir dir_;
  std::string csv_;
};

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({"validate"}).code, 0);
  EXPECT_NE(run({"train", "--data", "x.csv", "--epochs", "many"}).code, 0);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MissingFileIsReported) {
  const Result r = run({"validate", "--data", "/nonexistent/file.csv"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("toxpipe"), std::string::npos);
}

TEST_F(CliTest, ValidateAndStats) {
  const Result v = run({"validate", "--data", csv_});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_NO_THROW(nlohmann::json::parse(v.out));
  const Result s = run({"stats", "--data", csv_});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto j = nlohmann::json::parse(s.out);
  EXPECT_EQ(j["examples"].get<std::size_t>(), 90u);
  EXPECT_EQ(j["class_counts"], nlohmann::json::array({30, 30, 30}));
  EXPECT_TRUE(j.contains("sentiment"));
}

TEST_F(CliTest, TrainClassifyEvalRoundTrip) {
  const std::string before = support::read_file(csv_);
  const std::string out_dir = (dir_ / "run").string();
  const Result t = run(train_args(out_dir));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(support::read_file(csv_), before);
  const auto summary = nlohmann::json::parse(t.out);
  EXPECT_GE(summary["best_epoch"].get<int>(), 1);
  for (const char* f : {"model.toxm", "history.csv", "run_config.json"})
    EXPECT_TRUE(std::filesystem::exists(dir_ / "run" / f)) << f;

  const std::string model = out_dir + "/model.toxm";
  const Result c = run({"classify", "--model", model, "--text", "you vile scum"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(std::regex_match(c.out, std::regex(R"([012] \d\.\d{6} \d\.\d{6} \d\.\d{6}\n)"))) << c.out;

  support::write_file(dir_ / "lines.txt", "sunny garden\nidiot clown\n\n");
  const Result lines = run({"classify", "--model", model, "--input", (dir_ / "lines.txt").string()});
  ASSERT_EQ(lines.code, 0) << lines.err;
  EXPECT_EQ(std::count(lines.out.begin(), lines.out.end(), '\n'), 3);
  EXPECT_NE(run({"classify", "--model", model}).code, 0);

  const std::string cm_csv = (dir_ / "cm.csv").string();
  const Result e = run({"eval", "--model", model, "--data", csv_, "--fp-cost", "5", "--fn-cost", "10",
                        "--confusion-csv", cm_csv});
  ASSERT_EQ(e.code, 0) << e.err << e.out;
  const auto report = nlohmann::json::parse(e.out);
  EXPECT_TRUE(report.contains("confusion"));
  EXPECT_TRUE(report.contains("expected_cost"));
  EXPECT_EQ(support::read_file(cm_csv).rfind("true\\pred,hate,offensive,neither\n", 0), 0u);
  EXPECT_NE(run({"eval", "--model", model, "--data", csv_, "--fp-cost", "5"}).code, 0);
}

TEST_F(CliTest, TrainingIsByteReproducible) {
  const std::string a = (dir_ / "a").string(), b = (dir_ / "b").string();
  ASSERT_EQ(run(train_args(a)).code, 0);
  ASSERT_EQ(run(train_args(b)).code, 0);
  EXPECT_EQ(support::read_file(a + "/model.toxm"), support::read_file(b + "/model.toxm"));
  EXPECT_EQ(support::read_file(a + "/history.csv"), support::read_file(b + "/history.csv"));

  const std::string model = support::read_file(a + "/model.toxm");
  ASSERT_EQ(run({"rerun", "--config", a + "/run_config.json"}).code, 0);
  EXPECT_EQ(support::read_file(a + "/model.toxm"), model);
}

TEST_F(CliTest, AugmentWritesBalancedCsv) {
  std::filesystem::path skewed = dir_ / "skewed.csv";
  Corpus corpus = support::keyword_corpus(90, 2);
  std::erase_if(corpus, [](const LabeledExample& ex) { return ex.label == 0 && ex.id % 9 != 0; });
  write_csv(skewed, corpus);
  const std::string out = (dir_ / "aug.csv").string();
  const Result r = run({"augment", "--data", skewed.string(), "--out", out, "--rebalance", "1", "0", "0",
                        "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto counts = class_counts(load_csv(out));
  EXPECT_EQ(counts[0], std::max(counts[1], counts[2]));
  EXPECT_TRUE(std::filesystem::exists(out + ".run_config.json"));
}
