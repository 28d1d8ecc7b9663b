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

#ifndef ADVCSC_ADVTRAIN_H_
#define ADVCSC_ADVTRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advcsc/attack.h"
#include "advcsc/confusion.h"
#include "advcsc/corpus.h"
#include "advcsc/eval.h"
#include "advcsc/scorer.h"

namespace advcsc {

// Adversarial training schedule. Each round samples
// |clean| * ratio_adv / ratio_clean clean pairs (2:1 by default, i.e. half
// the clean set), attacks them against the current model and trains on all
// clean pairs plus the successful adversarial pairs.
struct AdvTrainPlan {
  std::size_t rounds = 3;
  double lambda = 0.02;
  std::size_t ratio_clean = 2;
  std::size_t ratio_adv = 1;
  std::size_t epochs_per_round = 1;
  TrainConfig train;
  std::uint64_t seed = 0;
  CharClass attackable = CharClass::kCjk;
  // Keep adversarial pairs from earlier rounds instead of regenerating only.
  bool accumulate = false;
  std::size_t workers = 1;

  void validate() const;
  std::size_t source_count(std::size_t clean) const;
  AttackConfig attack_config() const { return {lambda, attackable}; }
};

// Parses "2:1"-style ratios into (clean, adv).
std::pair<std::size_t, std::size_t> parse_ratio(const std::string& text);

// (adversarial, target) for every successful attack on `pairs`, in input
// order. Skipped and unsuccessful attacks contribute nothing.
std::vector<SentencePair> generate_adversarial_set(
    const Scorer& f, std::span<const SentencePair> pairs, const ConfusionSet& d,
    const AttackConfig& config, std::size_t workers = 1,
    AttackSummary* summary = nullptr);

// Sample of `count` distinct indices below n, drawn without replacement.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count,
                                        std::uint64_t seed);

struct RoundResult {
  std::size_t round = 0;
  std::size_t sources = 0;
  std::size_t adversarial = 0;
  std::size_t train_pairs = 0;
  AttackSummary attack;
};

// One adversarial training round (0-based `round`) applied in place.
// `pool` carries adversarial pairs across rounds in accumulate mode.
RoundResult adversarial_training_round(WindowScorer& f,
                                       std::span<const SentencePair> clean,
                                       const ConfusionSet& d,
                                       const AdvTrainPlan& plan,
                                       std::size_t round,
                                       std::vector<SentencePair>* pool = nullptr);

// Runs plan.rounds rounds.
std::vector<RoundResult> adversarial_training(WindowScorer& f,
                                              std::span<const SentencePair> clean,
                                              const ConfusionSet& d,
                                              const AdvTrainPlan& plan);

struct StageSnapshot {
  std::string stage;
  std::size_t train_pairs = 0;
  std::size_t adversarial_pairs = 0;
  EvalReport clean;
  EvalReport attacked;
};

struct PipelineOptions {
  ScorerDims dims;
  CorruptionPolicy policy;
  TrainConfig pretrain;
  TrainConfig finetune;
  // Absent means no adversarial stage.
  std::optional<AdvTrainPlan> plan;
  // Attack budget for the per-stage ATTACK metrics.
  double eval_lambda = 0.02;
  std::size_t workers = 1;
  // Called with each stage's scorer right after its snapshot is taken.
  std::function<void(const std::string& stage, const WindowScorer&)> on_stage;
};

struct PipelineReport {
  std::vector<StageSnapshot> stages;
  std::vector<RoundResult> rounds;
};

// Pre-trains a fresh scorer on corruption-synthesized pairs from
// `clean_corpus`, fine-tunes on `train`, then runs the adversarial rounds,
// evaluating on `test` (clean and attacked) after every stage.
WindowScorer pipeline(const std::vector<Sentence>& clean_corpus,
                      std::span<const SentencePair> train,
                      std::span<const SentencePair> test,
                      const ConfusionSet& d, const PipelineOptions& options,
                      PipelineReport* report = nullptr);

nlohmann::json to_json(const RoundResult& r);
nlohmann::json to_json(const StageSnapshot& s);
nlohmann::json to_json(const PipelineReport& r);

}  // namespace advcsc

#endif  // ADVCSC_ADVTRAIN_H_
