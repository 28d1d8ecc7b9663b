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

#include "advcsc/advtrain.h"

#include <gtest/gtest.h>

#include <set>

#include "support/toy_benchmark.h"

namespace advcsc {
namespace {

using testing::make_toy_benchmark;
using testing::ToyBenchmark;
using testing::ToyOptions;

// A small toy benchmark and a scorer fitted to it, shared by the tests that
// need a model that is right most of the time.
class ToyModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ToyOptions o;
    o.train = 600;
    o.test = 100;
    o.corpus = 0;
    bench_ = new ToyBenchmark(make_toy_benchmark(o));
    std::vector<Sentence> text;
    for (const auto& p : bench_->train) text.push_back(p.target);
    const auto forced = bench_->confusion.all_characters();
    model_ = new WindowScorer(WindowScorer::initialize(
        build_vocab(text, 1, forced), ScorerDims{}, 0.05, 11));
    TrainConfig cfg{0.5, 30, 16, 12};
    model_->fit(bench_->train, cfg);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete bench_;
  }

  static AdvTrainPlan plan() {
    AdvTrainPlan p;
    p.rounds = 2;
    p.lambda = 0.05;
    p.epochs_per_round = 3;
    p.attackable = CharClass::kLetters;
    p.train = TrainConfig{0.5, 1, 16, 21};
    p.seed = 22;
    return p;
  }

  static ToyBenchmark* bench_;
  static WindowScorer* model_;
};

ToyBenchmark* ToyModel::bench_ = nullptr;
WindowScorer* ToyModel::model_ = nullptr;

TEST_F(ToyModel, ZeroScorerYieldsNoAdversarialPairs) {
  // All-zero logits predict UNK everywhere, so every attack returns early.
  const WindowScorer zero(model_->vocab(),
                          ScorerParams::zeros(model_->params().dims));
  AttackSummary s;
  const auto adv = generate_adversarial_set(zero, bench_->train, bench_->confusion,
                                            {0.05, CharClass::kLetters}, 1, &s);
  EXPECT_TRUE(adv.empty());
  EXPECT_EQ(s.already_wrong, bench_->train.size());
}

TEST_F(ToyModel, EmptyConfusionSetYieldsNoAdversarialPairs) {
  EXPECT_TRUE(generate_adversarial_set(*model_, bench_->train, ConfusionSet{},
                                       {0.05, CharClass::kLetters})
                  .empty());
}

TEST_F(ToyModel, AdversarialPairsStayWithinBudget) {
  const double lambda = 0.05;
  const auto adv = generate_adversarial_set(*model_, bench_->train, bench_->confusion,
                                            {lambda, CharClass::kLetters});
  ASSERT_FALSE(adv.empty());
  // Adversarial sources come from sources the model handled, so their
  // distance from the target is the error count plus the substitutions.
  std::set<Sentence> targets;
  for (const auto& p : bench_->train) targets.insert(p.target);
  for (const auto& p : adv) {
    EXPECT_TRUE(targets.count(p.target));
    EXPECT_NE(predict(*model_, p.source), p.target);
  }
  const auto outcomes = attack_corpus(bench_->train, *model_, bench_->confusion,
                                      {lambda, CharClass::kLetters});
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& x = bench_->train[i].source;
    std::size_t diff = 0;
    for (std::size_t k = 0; k < x.size(); ++k) diff += outcomes[i].adversarial[k] != x[k];
    EXPECT_LE(diff, max_substitutions(lambda, x.size()));
  }
}

TEST_F(ToyModel, RoundUsesHalfTheCleanSetAsSources) {
  WindowScorer f = *model_;
  const RoundResult r =
      adversarial_training_round(f, bench_->train, bench_->confusion, plan(), 0);
  EXPECT_EQ(r.sources, 300u);
  EXPECT_EQ(r.adversarial, r.attack.succeeded);
  EXPECT_EQ(r.train_pairs, 600u + r.adversarial);
}

TEST_F(ToyModel, EmptyAdversarialSetStillTrains) {
  WindowScorer f = *model_;
  const RoundResult r =
      adversarial_training_round(f, bench_->train, ConfusionSet{}, plan(), 0);
  EXPECT_EQ(r.adversarial, 0u);
  EXPECT_EQ(r.train_pairs, 600u);
  EXPECT_FALSE(f.params() == model_->params());
}

TEST_F(ToyModel, RoundsAreDeterministic) {
  WindowScorer a = *model_;
  WindowScorer b = *model_;
  AdvTrainPlan p = plan();
  AdvTrainPlan q = plan();
  q.workers = 3;
  adversarial_training(a, bench_->train, bench_->confusion, p);
  adversarial_training(b, bench_->train, bench_->confusion, q);
  EXPECT_TRUE(a.params() == b.params());
}

TEST_F(ToyModel, RoundsLowerAttackSuccess) {
  const AttackConfig cfg{0.05, CharClass::kLetters};
  AttackSummary before;
  generate_adversarial_set(*model_, bench_->test, bench_->confusion, cfg, 1, &before);
  WindowScorer f = *model_;
  adversarial_training(f, bench_->train, bench_->confusion, plan());
  AttackSummary after;
  generate_adversarial_set(f, bench_->test, bench_->confusion, cfg, 1, &after);
  EXPECT_LT(after.success_rate(), before.success_rate());
}

TEST_F(ToyModel, AccumulateModeKeepsEarlierPairs) {
  WindowScorer f = *model_;
  AdvTrainPlan p = plan();
  p.accumulate = true;
  std::vector<SentencePair> pool;
  const RoundResult r0 =
      adversarial_training_round(f, bench_->train, bench_->confusion, p, 0, &pool);
  const RoundResult r1 =
      adversarial_training_round(f, bench_->train, bench_->confusion, p, 1, &pool);
  EXPECT_EQ(pool.size(), r0.adversarial + r1.adversarial);
  EXPECT_EQ(r1.train_pairs, 600u + pool.size());
}

TEST_F(ToyModel, PipelineReportsEveryStage) {
  ToyOptions o;
  o.train = 200;
  o.test = 50;
  o.corpus = 200;
  const ToyBenchmark b = make_toy_benchmark(o);
  PipelineOptions opt;
  opt.dims.dim = 8;
  opt.dims.hidden = 16;
  opt.policy.attackable = CharClass::kLetters;
  opt.pretrain.epochs = 1;
  opt.finetune.epochs = 1;
  AdvTrainPlan p = plan();
  p.rounds = 3;
  p.epochs_per_round = 1;
  opt.plan = p;
  PipelineReport rep;
  pipeline(b.corpus, b.train, b.test, b.confusion, opt, &rep);
  ASSERT_EQ(rep.stages.size(), 5u);
  EXPECT_EQ(rep.stages[0].stage, "pretrain");
  EXPECT_EQ(rep.stages[1].stage, "finetune");
  EXPECT_EQ(rep.stages[4].stage, "adversarial-round-3");
  EXPECT_EQ(rep.rounds.size(), 3u);
  const nlohmann::json j = to_json(rep);
  EXPECT_EQ(j["stages"].size(), 5u);
  EXPECT_TRUE(j["stages"][2].contains("attack_success_rate"));

  opt.plan.reset();
  pipeline(b.corpus, b.train, b.test, b.confusion, opt, &rep);
  EXPECT_EQ(rep.stages.size(), 2u);
}

TEST(PlanTest, Validation) {
  AdvTrainPlan p;
  p.rounds = 0;
  EXPECT_THROW(p.validate(), Error);
  p.rounds = 1;
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p.lambda = 0.02;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.source_count(600), 300u);
  EXPECT_EQ(p.source_count(7), 3u);
  p.ratio_clean = 1;
  p.ratio_adv = 1;
  EXPECT_EQ(p.source_count(7), 7u);

  PipelineOptions opt;
  AdvTrainPlan zero;
  zero.rounds = 0;
  opt.plan = zero;
  const std::vector<SentencePair> pairs{{U"a", U"a"}};
  EXPECT_THROW(pipeline({}, pairs, pairs, ConfusionSet{}, opt), Error);
}

TEST(PlanTest, RatioParsing) {
  EXPECT_EQ(parse_ratio("2:1"), (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_EQ(parse_ratio("3:2"), (std::pair<std::size_t, std::size_t>{3, 2}));
  for (const char* bad : {"2", "2:", ":1", "0:1", "2:0", "a:b", "2:1x", "-1:2"}) {
    EXPECT_THROW(parse_ratio(bad), Error) << bad;
  }
}

TEST(SampleTest, DistinctAndSeeded) {
  const auto a = sample_indices(600, 300, 5);
  EXPECT_EQ(a.size(), 300u);
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 300u);
  for (std::size_t i : a) EXPECT_LT(i, 600u);
  EXPECT_EQ(a, sample_indices(600, 300, 5));
  EXPECT_NE(a, sample_indices(600, 300, 6));
  EXPECT_EQ(sample_indices(3, 10, 1).size(), 3u);
}

}  // namespace
}  // namespace advcsc
