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

#ifndef ADVCSC_ATTACK_H_
#define ADVCSC_ATTACK_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "advcsc/confusion.h"
#include "advcsc/corpus.h"
#include "advcsc/scorer.h"
#include "advcsc/text.h"

namespace advcsc {

struct AttackConfig {
  // Fraction of the sentence that may be changed, in (0, 1].
  double lambda = 0.02;
  CharClass attackable = CharClass::kCjk;

  void validate() const;
};

// Largest number of substitutions the greedy loop can make on a sentence of
// length n. The loop guard is `count <= lambda * n` with the count starting
// at zero, so this is floor(lambda * n) + 1.
std::size_t max_substitutions(double lambda, std::size_t n);

enum class SkipReason {
  kNone,
  kAlreadyWrong,        // the model mispredicts the unmodified input
  kNoEligiblePosition,  // a full pass found nothing substitutable
  kBudgetExhausted,     // substitution limit reached, prediction unchanged
};
std::string_view skip_reason_name(SkipReason r);

struct Substitution {
  std::size_t position;
  Char original;
  Char replacement;
  // Positional score of `position` when it was chosen.
  double score;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

struct AttackOutcome {
  Sentence adversarial;
  std::vector<Substitution> substitutions;
  // The model's prediction on `adversarial` differs from the target and at
  // least the unmodified input was predicted correctly.
  bool success = false;
  SkipReason skipped = SkipReason::kNone;

  friend bool operator==(const AttackOutcome&, const AttackOutcome&) = default;
};

// s_i = o_i[y_i] - max_{r != y_i} o_i[r]. Throws Error when the matrix has
// fewer than two columns or its row count differs from target.size().
std::vector<double> positional_scores(const LogitMatrix& logits,
                                      std::span<const int> target);

// Positions whose target character is attackable and still unmodified in
// `current`, ordered by ascending score with ties to the lower position.
std::vector<std::size_t> eligible_positions(std::u32string_view current,
                                            std::u32string_view target,
                                            std::span<const double> scores,
                                            const AttackConfig& config);

// The confusion candidate of `original` with the highest logit in `row`,
// considering only in-vocabulary candidates; ties go to the lower id.
std::optional<Char> best_confusion_substitute(std::span<const double> row,
                                              Char original,
                                              const ConfusionSet& d,
                                              const Vocab& vocab);

// Greedy logit-guided attack. Starting from x, repeatedly substitutes the
// lowest-scoring eligible position that has a usable confusion candidate
// (scores are taken against y on logits of the current perturbed sentence)
// until the prediction differs from y, the substitution budget is spent, or
// no position can be substituted. Returns x unchanged when the model already
// mispredicts it.
AttackOutcome attack(const Sentence& x, const Sentence& y, const Scorer& f,
                     const ConfusionSet& d, const AttackConfig& config);

std::vector<AttackOutcome> attack_corpus(std::span<const SentencePair> pairs,
                                         const Scorer& f, const ConfusionSet& d,
                                         const AttackConfig& config,
                                         std::size_t workers = 1);

struct AttackSummary {
  std::size_t total = 0;
  std::size_t already_wrong = 0;
  std::size_t succeeded = 0;
  std::size_t no_eligible_position = 0;
  std::size_t budget_exhausted = 0;
  std::size_t substitutions = 0;

  // Successes over sentences the model handled correctly before the attack.
  double success_rate() const;
};
AttackSummary summarize(std::span<const AttackOutcome> outcomes);

// `<original>\t<target>\t<adversarial>\t<success>\t<num_subs>` per pair.
void write_outcomes_tsv(std::span<const SentencePair> pairs,
                        std::span<const AttackOutcome> outcomes,
                        std::ostream& out);
nlohmann::json outcomes_to_json(std::span<const SentencePair> pairs,
                                std::span<const AttackOutcome> outcomes);

}  // namespace advcsc

#endif  // ADVCSC_ATTACK_H_
