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

#ifndef ADVCSC_EVAL_H_
#define ADVCSC_EVAL_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "advcsc/attack.h"
#include "advcsc/confusion.h"
#include "advcsc/corpus.h"
#include "advcsc/scorer.h"

namespace advcsc {

// Sentence-level judgment of one prediction.
//   flagged:        the prediction edits the source somewhere.
//   detection_hit:  the pair has errors and the edited positions are exactly
//                   the error positions.
//   correction_hit: the pair has errors and the prediction equals the target.
struct Judgment {
  bool flagged = false;
  bool detection_hit = false;
  bool correction_hit = false;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

// Throws Error on a length mismatch.
Judgment judge_sentence(std::u32string_view pred, const SentencePair& pair);

struct Rates {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// F1 is 0 when precision + recall is 0; zero denominators give rate 0.
Rates make_rates(std::size_t tp, std::size_t predicted, std::size_t actual);

struct EvalCounts {
  std::size_t sentences = 0;
  std::size_t sentences_with_errors = 0;
  std::size_t flagged = 0;
  std::size_t detection_tp = 0;
  std::size_t correction_tp = 0;
  std::size_t attack_skipped_already_wrong = 0;
};

struct EvalReport {
  Rates detection;
  Rates correction;
  EvalCounts counts;
  // Set for attacked evaluations.
  std::optional<double> lambda;
  std::optional<AttackSummary> attack;
  // Largest per-sentence substitution budget, floor(lambda * n) + 1.
  std::optional<std::size_t> max_budget;
};

EvalReport compute_report(std::span<const Sentence> preds,
                          std::span<const SentencePair> pairs);

EvalReport evaluate_clean(const Scorer& f, std::span<const SentencePair> pairs,
                          std::size_t workers = 1,
                          std::vector<Sentence>* preds = nullptr);

// Replaces every source with its adversarial version (left unchanged when
// the attack is skipped) and evaluates against the original targets.
// Sentences the model already got wrong stay in the set and are counted in
// counts.attack_skipped_already_wrong.
EvalReport evaluate_under_attack(const Scorer& f,
                                 std::span<const SentencePair> pairs,
                                 const ConfusionSet& d,
                                 const AttackConfig& config,
                                 std::size_t workers = 1,
                                 std::vector<AttackOutcome>* outcomes = nullptr);

// F1 loss in absolute points (F1 scaled to 0..100): clean minus attacked.
struct RobustnessDrop {
  double detection = 0.0;
  double correction = 0.0;
};
RobustnessDrop robustness_drop(const EvalReport& clean,
                               const EvalReport& attacked);

nlohmann::json to_json(const EvalReport& report);

// `<source>\t<target>\t<prediction>\t<flagged>\t<detection_hit>\t<correction_hit>`
void write_judgments_tsv(std::span<const Sentence> preds,
                         std::span<const SentencePair> pairs, std::ostream& out);

}  // namespace advcsc

#endif  // ADVCSC_EVAL_H_
