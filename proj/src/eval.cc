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

#include "advcsc/eval.h"

#include <algorithm>

#include "advcsc/parallel.h"

namespace advcsc {

Judgment judge_sentence(std::u32string_view pred, const SentencePair& pair) {
  if (pred.size() != pair.source.size() || pair.source.size() != pair.target.size()) {
    throw Error("prediction length " + std::to_string(pred.size()) +
                " does not match sentence length " +
                std::to_string(pair.source.size()));
  }
  Judgment j;
  bool same_positions = true;
  bool has_errors = false;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool edited = pred[i] != pair.source[i];
    const bool wrong = pair.target[i] != pair.source[i];
    j.flagged |= edited;
    has_errors |= wrong;
    same_positions &= edited == wrong;
  }
  j.detection_hit = has_errors && same_positions;
  j.correction_hit = has_errors && pred == std::u32string_view(pair.target);
  return j;
}

Rates make_rates(std::size_t tp, std::size_t predicted, std::size_t actual) {
  Rates r;
  r.precision = predicted == 0 ? 0.0
                               : static_cast<double>(tp) /
                                     static_cast<double>(predicted);
  r.recall =
      actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
  // 2PR/(P+R) reduces to 2tp/(predicted+actual), which rounds only once.
  r.f1 = tp == 0 ? 0.0
                 : 2.0 * static_cast<double>(tp) /
                       static_cast<double>(predicted + actual);
  return r;
}

EvalReport compute_report(std::span<const Sentence> preds,
                          std::span<const SentencePair> pairs) {
  if (preds.size() != pairs.size()) {
    throw Error("got " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(pairs.size()) + " sentences");
  }
  EvalReport report;
  EvalCounts& c = report.counts;
  c.sentences = pairs.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Judgment j = judge_sentence(preds[i], pairs[i]);
    c.sentences_with_errors += pairs[i].has_errors() ? 1 : 0;
    c.flagged += j.flagged ? 1 : 0;
    c.detection_tp += j.detection_hit ? 1 : 0;
    c.correction_tp += j.correction_hit ? 1 : 0;
  }
  report.detection = make_rates(c.detection_tp, c.flagged, c.sentences_with_errors);
  report.correction =
      make_rates(c.correction_tp, c.flagged, c.sentences_with_errors);
  return report;
}

EvalReport evaluate_clean(const Scorer& f, std::span<const SentencePair> pairs,
                          std::size_t workers, std::vector<Sentence>* preds) {
  std::vector<Sentence> local(pairs.size());
  parallel_for(pairs.size(), workers,
               [&](std::size_t i) { local[i] = predict(f, pairs[i].source); });
  EvalReport report = compute_report(local, pairs);
  if (preds != nullptr) *preds = std::move(local);
  return report;
}

EvalReport evaluate_under_attack(const Scorer& f,
                                 std::span<const SentencePair> pairs,
                                 const ConfusionSet& d,
                                 const AttackConfig& config,
                                 std::size_t workers,
                                 std::vector<AttackOutcome>* outcomes) {
  std::vector<AttackOutcome> attacked = attack_corpus(pairs, f, d, config, workers);
  std::vector<SentencePair> adv(pairs.size());
  std::size_t max_budget = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    adv[i] = {attacked[i].adversarial, pairs[i].target};
    max_budget = std::max(max_budget,
                          max_substitutions(config.lambda, pairs[i].source.size()));
  }
  EvalReport report = evaluate_clean(f, adv, workers);
  report.lambda = config.lambda;
  report.attack = summarize(attacked);
  report.max_budget = max_budget;
  report.counts.attack_skipped_already_wrong = report.attack->already_wrong;
  if (outcomes != nullptr) *outcomes = std::move(attacked);
  return report;
}

RobustnessDrop robustness_drop(const EvalReport& clean,
                               const EvalReport& attacked) {
  return {100.0 * (clean.detection.f1 - attacked.detection.f1),
          100.0 * (clean.correction.f1 - attacked.correction.f1)};
}

namespace {

nlohmann::json rates_json(const Rates& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
  const EvalCounts& c = report.counts;
  nlohmann::json j = {
      {"detection", rates_json(report.detection)},
      {"correction", rates_json(report.correction)},
      {"counts",
       {{"sentences", c.sentences},
        {"sentences_with_errors", c.sentences_with_errors},
        {"flagged", c.flagged},
        {"detection_tp", c.detection_tp},
        {"correction_tp", c.correction_tp},
        {"attack_skipped_already_wrong", c.attack_skipped_already_wrong}}},
  };
  j["lambda"] = report.lambda ? nlohmann::json(*report.lambda) : nlohmann::json();
  if (report.attack) {
    const AttackSummary& a = *report.attack;
    j["attack"] = {{"success_rate", a.success_rate()},
                   {"succeeded", a.succeeded},
                   {"already_wrong", a.already_wrong},
                   {"no_eligible_position", a.no_eligible_position},
                   {"budget_exhausted", a.budget_exhausted},
                   {"substitutions", a.substitutions},
                   {"max_budget", report.max_budget.value_or(0)}};
  }
  return j;
}

void write_judgments_tsv(std::span<const Sentence> preds,
                         std::span<const SentencePair> pairs, std::ostream& out) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Judgment j = judge_sentence(preds[i], pairs[i]);
    out << encode_utf8(pairs[i].source) << '\t' << encode_utf8(pairs[i].target)
        << '\t' << encode_utf8(preds[i]) << '\t' << std::boolalpha << j.flagged
        << '\t' << j.detection_hit << '\t' << j.correction_hit << '\n';
  }
}

}  // namespace advcsc
