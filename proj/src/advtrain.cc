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

#include <numeric>
#include <string_view>

#include "advcsc/rng.h"

namespace advcsc {

void AdvTrainPlan::validate() const {
  if (rounds < 1) throw Error("an adversarial plan needs at least one round");
  if (ratio_clean == 0 || ratio_adv == 0) {
    throw Error("ratio terms must be positive");
  }
  if (epochs_per_round < 1) throw Error("epochs per round must be at least 1");
  attack_config().validate();
  train.validate();
}

std::size_t AdvTrainPlan::source_count(std::size_t clean) const {
  return std::min(clean, clean * ratio_adv / ratio_clean);
}

std::pair<std::size_t, std::size_t> parse_ratio(const std::string& text) {
  const auto number = [&](std::string_view part) -> std::size_t {
    if (part.empty() || part.size() > 9 ||
        part.find_first_not_of("0123456789") != std::string_view::npos) {
      throw Error("ratio must look like '2:1' with positive terms, got '" +
                  text + "'");
    }
    return std::stoull(std::string(part));
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) number("");
  const std::string_view view(text);
  const std::size_t a = number(view.substr(0, colon));
  const std::size_t b = number(view.substr(colon + 1));
  if (a == 0 || b == 0) number("");
  return {a, b};
}

std::vector<SentencePair> generate_adversarial_set(
    const Scorer& f, std::span<const SentencePair> pairs, const ConfusionSet& d,
    const AttackConfig& config, std::size_t workers, AttackSummary* summary) {
  const auto outcomes = attack_corpus(pairs, f, d, config, workers);
  std::vector<SentencePair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (outcomes[i].success) {
      out.push_back({outcomes[i].adversarial, pairs[i].target});
    }
  }
  if (summary != nullptr) *summary = summarize(outcomes);
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, count));
  return idx;
}

RoundResult adversarial_training_round(WindowScorer& f,
                                       std::span<const SentencePair> clean,
                                       const ConfusionSet& d,
                                       const AdvTrainPlan& plan,
                                       std::size_t round,
                                       std::vector<SentencePair>* pool) {
  plan.validate();
  if (clean.empty()) throw Error("adversarial training needs clean pairs");
  RoundResult result;
  result.round = round;

  const auto picked = sample_indices(clean.size(), plan.source_count(clean.size()),
                                     derive_seed(plan.seed, round));
  std::vector<SentencePair> sources;
  sources.reserve(picked.size());
  for (std::size_t i : picked) sources.push_back(clean[i]);
  result.sources = sources.size();

  std::vector<SentencePair> adversarial = generate_adversarial_set(
      f, sources, d, plan.attack_config(), plan.workers, &result.attack);
  result.adversarial = adversarial.size();

  std::vector<SentencePair> merged(clean.begin(), clean.end());
  if (plan.accumulate && pool != nullptr) {
    pool->insert(pool->end(), adversarial.begin(), adversarial.end());
    merged.insert(merged.end(), pool->begin(), pool->end());
  } else {
    merged.insert(merged.end(), adversarial.begin(), adversarial.end());
  }
  result.train_pairs = merged.size();

  TrainConfig cfg = plan.train;
  cfg.epochs = plan.epochs_per_round;
  cfg.seed = derive_seed(plan.train.seed, 0x5EED0000ULL + round);
  f.fit(merged, cfg);
  return result;
}

std::vector<RoundResult> adversarial_training(WindowScorer& f,
                                              std::span<const SentencePair> clean,
                                              const ConfusionSet& d,
                                              const AdvTrainPlan& plan) {
  plan.validate();
  std::vector<SentencePair> pool;
  std::vector<RoundResult> results;
  for (std::size_t r = 0; r < plan.rounds; ++r) {
    results.push_back(adversarial_training_round(f, clean, d, plan, r, &pool));
  }
  return results;
}

namespace {

StageSnapshot snapshot(std::string stage, const WindowScorer& f,
                       std::span<const SentencePair> test, const ConfusionSet& d,
                       const PipelineOptions& options, std::size_t train_pairs,
                       std::size_t adversarial_pairs) {
  StageSnapshot s;
  s.stage = std::move(stage);
  s.train_pairs = train_pairs;
  s.adversarial_pairs = adversarial_pairs;
  s.clean = evaluate_clean(f, test, options.workers);
  const AttackConfig attack{options.eval_lambda, options.policy.attackable};
  s.attacked = evaluate_under_attack(f, test, d, attack, options.workers);
  if (options.on_stage) options.on_stage(s.stage, f);
  return s;
}

}  // namespace

WindowScorer pipeline(const std::vector<Sentence>& clean_corpus,
                      std::span<const SentencePair> train,
                      std::span<const SentencePair> test,
                      const ConfusionSet& d, const PipelineOptions& options,
                      PipelineReport* report) {
  options.policy.validate();
  if (options.plan) options.plan->validate();
  if (train.empty()) throw Error("pipeline needs fine-tuning pairs");

  std::vector<Sentence> text = clean_corpus;
  for (const auto& p : train) {
    text.push_back(p.source);
    text.push_back(p.target);
  }
  const auto forced = d.all_characters();
  Vocab vocab = build_vocab(text, 1, forced);

  PipelineReport local;
  const auto pretrain_pairs = synthesize_corpus(clean_corpus, options.policy, d,
                                                vocab, options.workers);
  WindowScorer f = WindowScorer::initialize(
      vocab, options.dims, options.pretrain.init_scale, options.pretrain.seed);
  if (!pretrain_pairs.empty()) f.fit(pretrain_pairs, options.pretrain);
  local.stages.push_back(snapshot("pretrain", f, test, d, options,
                                  pretrain_pairs.size(), 0));

  f.fit(train, options.finetune);
  local.stages.push_back(snapshot("finetune", f, test, d, options, train.size(), 0));

  if (options.plan) {
    const AdvTrainPlan& plan = *options.plan;
    std::vector<SentencePair> pool;
    for (std::size_t r = 0; r < plan.rounds; ++r) {
      RoundResult rr = adversarial_training_round(f, train, d, plan, r, &pool);
      local.stages.push_back(snapshot("adversarial-round-" + std::to_string(r + 1),
                                      f, test, d, options, rr.train_pairs,
                                      rr.adversarial));
      local.rounds.push_back(rr);
    }
  }
  if (report != nullptr) *report = std::move(local);
  return f;
}

nlohmann::json to_json(const RoundResult& r) {
  return {{"round", r.round + 1},
          {"sources", r.sources},
          {"adversarial", r.adversarial},
          {"train_pairs", r.train_pairs},
          {"attack_success_rate", r.attack.success_rate()},
          {"already_wrong", r.attack.already_wrong}};
}

nlohmann::json to_json(const StageSnapshot& s) {
  return {{"stage", s.stage},
          {"clean_detection_f1", s.clean.detection.f1},
          {"clean_correction_f1", s.clean.correction.f1},
          {"attack_detection_f1", s.attacked.detection.f1},
          {"attack_correction_f1", s.attacked.correction.f1},
          {"attack_success_rate",
           s.attacked.attack ? s.attacked.attack->success_rate() : 0.0},
          {"counts",
           {{"train_pairs", s.train_pairs},
            {"adversarial_pairs", s.adversarial_pairs},
            {"test_sentences", s.clean.counts.sentences},
            {"attack_skipped_already_wrong",
             s.attacked.counts.attack_skipped_already_wrong}}},
          {"clean", to_json(s.clean)},
          {"attack", to_json(s.attacked)}};
}

nlohmann::json to_json(const PipelineReport& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& x : r.rounds) rounds.push_back(to_json(x));
  return {{"stages", stages}, {"rounds", rounds}};
}

}  // namespace advcsc
