// Copyright 2026 The advcsc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "advcsc/corpus.h"
#include "support/toy_benchmark.h"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string output;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(ADVCSC_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() /
                        ("advcsc_cli_test_" + std::to_string(::getpid())));
    fs::create_directories(*dir_);
    advcsc::testing::ToyOptions o;
    o.train = 150;
    o.test = 40;
    o.corpus = 150;
    advcsc::testing::write_toy_benchmark(advcsc::testing::make_toy_benchmark(o),
                                         dir_->string());
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string at(const std::string& name) { return (*dir_ / name).string(); }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, MissingConfusionFileIsNamed) {
  const CliRun r = run_cli("synth --confusion " + at("nope.tsv") + " --corpus " +
                        at("corpus.txt") + " --out " + at("x.tsv"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("nope.tsv"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(at("x.tsv")));
}

TEST_F(CliTest, MalformedConfusionLineIsReported) {
  spit(at("bad.tsv"), "a\tb\nno-tab-here\n");
  const CliRun r = run_cli("synth --confusion " + at("bad.tsv") + " --corpus " +
                        at("corpus.txt") + " --out " + at("x.tsv"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("bad.tsv:2"), std::string::npos) << r.output;
}

TEST_F(CliTest, UnknownAttackableClassIsRejected) {
  const CliRun r = run_cli("synth --attackable greek --confusion " + at("confusion.tsv") +
                        " --corpus " + at("corpus.txt") + " --out " + at("x.tsv"));
  EXPECT_NE(r.status, 0);
}

TEST_F(CliTest, ZeroSelectRateCopiesTheCorpus) {
  const CliRun r = run_cli("synth --select-rate 0 --attackable letters --confusion " +
                        at("confusion.tsv") + " --corpus " + at("corpus.txt") +
                        " --out " + at("synth0.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto pairs = advcsc::load_parallel(at("synth0.tsv"));
  const auto lines = advcsc::load_sentences(at("corpus.txt"));
  ASSERT_EQ(pairs.size(), lines.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].source, lines[i]);
    EXPECT_EQ(pairs[i].target, lines[i]);
  }
}

TEST_F(CliTest, EvalOfPerfectPredictionsScoresOne) {
  std::string preds;
  for (const auto& p : advcsc::load_parallel(at("test.tsv"))) {
    preds += advcsc::encode_utf8(p.target) + "\n";
  }
  spit(at("perfect.txt"), preds);
  const CliRun r = run_cli("eval --pairs " + at("test.tsv") + " --preds " +
                        at("perfect.txt") + " --out " + at("perfect.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(at("perfect.json")));
  for (const char* k : {"detection", "correction"}) {
    EXPECT_EQ(j["clean"][k]["f1"], 1.0);
    EXPECT_EQ(j["clean"][k]["precision"], 1.0);
    EXPECT_EQ(j["clean"][k]["recall"], 1.0);
  }
}

TEST_F(CliTest, EvalNeedsExactlyOneModelSource) {
  const CliRun r = run_cli("eval --pairs " + at("test.tsv") + " --out " + at("e.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("--preds"), std::string::npos);
}

TEST_F(CliTest, TrainAttackEvalChain) {
  const std::string common = " --attackable letters --dim 8 --hidden 16 --lr 0.5 ";
  CliRun r = run_cli("train" + common + "--epochs 5 --pairs " + at("train.tsv") +
                  " --confusion " + at("confusion.tsv") + " --out " + at("m.ckpt"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("epoch 5 loss"), std::string::npos);

  r = run_cli("attack" + common + "--lambda 0.02 --checkpoint " + at("m.ckpt") +
              " --pairs " + at("test.tsv") + " --confusion " + at("confusion.tsv") +
              " --out " + at("adv.tsv") + " --trace " + at("adv.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  std::istringstream rows(slurp(at("adv.tsv")));
  std::string line;
  std::size_t count = 0;
  while (std::getline(rows, line)) {
    std::vector<std::string> cols;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, '\t');) cols.push_back(f);
    ASSERT_EQ(cols.size(), 5u) << line;
    const std::size_t n = advcsc::decode_nfc(cols[0]).size();
    EXPECT_LE(std::stoul(cols[4]), static_cast<std::size_t>(std::floor(0.02 * n)) + 1);
    EXPECT_TRUE(cols[3] == "true" || cols[3] == "false");
    ++count;
  }
  EXPECT_EQ(count, 40u);
  EXPECT_TRUE(nlohmann::json::parse(slurp(at("adv.json"))).is_array());

  r = run_cli("eval" + common + "--checkpoint " + at("m.ckpt") + " --pairs " +
              at("test.tsv") + " --confusion " + at("confusion.tsv") + " --out " +
              at("eval.json") + " --judgments " + at("judg.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(at("eval.json")));
  EXPECT_TRUE(j.contains("drop"));
  EXPECT_LE(j["attack"]["correction"]["f1"].get<double>(),
            j["clean"]["correction"]["f1"].get<double>());

  r = run_cli("advtrain" + common + "--epochs 1 --rounds 2 --checkpoint " +
              at("m.ckpt") + " --pairs " + at("train.tsv") + " --test " +
              at("test.tsv") + " --confusion " + at("confusion.tsv") + " --out " +
              at("adv.ckpt") + " --report " + at("adv_report.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(nlohmann::json::parse(slurp(at("adv_report.json")))["rounds"].size(), 2u);
}

TEST_F(CliTest, CorruptCheckpointFailsWithoutPartialOutput) {
  spit(at("junk.ckpt"), "definitely not a checkpoint");
  const CliRun r = run_cli("attack --checkpoint " + at("junk.ckpt") + " --pairs " +
                        at("test.tsv") + " --confusion " + at("confusion.tsv") +
                        " --out " + at("junk_out.tsv"));
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(fs::exists(at("junk_out.tsv")));
  EXPECT_FALSE(fs::exists(at("junk_out.tsv.partial")));
}

TEST_F(CliTest, PipelineRejectsZeroRounds) {
  const CliRun r = run_cli("pipeline --rounds 0 --corpus " + at("corpus.txt") +
                        " --pairs " + at("train.tsv") + " --test " + at("test.tsv") +
                        " --confusion " + at("confusion.tsv") + " --out " + at("p.ckpt"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("--rounds"), std::string::npos);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  spit(at("run.toml"), "select-rate = 0\nattackable = \"letters\"\n");
  const CliRun r = run_cli("--config " + at("run.toml") + " synth --confusion " +
                        at("confusion.tsv") + " --corpus " + at("corpus.txt") +
                        " --out " + at("cfg.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("select-rate = 0\n"), std::string::npos);
  EXPECT_NE(r.output.find("replaced = 0\n"), std::string::npos);
}

TEST_F(CliTest, SynthIsIndependentOfWorkerCount) {
  const std::string args = "synth --attackable letters --confusion " +
                           at("confusion.tsv") + " --corpus " + at("corpus.txt");
  ASSERT_EQ(run_cli(args + " --seed 9 --workers 1 --out " + at("s1.tsv")).status, 0);
  ASSERT_EQ(run_cli(args + " --seed 9 --workers 3 --out " + at("s3.tsv")).status, 0);
  ASSERT_EQ(run_cli(args + " --seed 9 --workers 1 --out " + at("s1b.tsv")).status, 0);
  EXPECT_EQ(slurp(at("s1.tsv")), slurp(at("s3.tsv")));
  EXPECT_EQ(slurp(at("s1.tsv")), slurp(at("s1b.tsv")));
  ASSERT_EQ(run_cli(args + " --seed 10 --workers 1 --out " + at("s10.tsv")).status, 0);
  EXPECT_NE(slurp(at("s1.tsv")), slurp(at("s10.tsv")));
}

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
