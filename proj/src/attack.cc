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

#include "advcsc/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "advcsc/parallel.h"

namespace advcsc {

void AttackConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error("lambda must lie in (0, 1]");
  }
}

std::size_t max_substitutions(double lambda, std::size_t n) {
  return static_cast<std::size_t>(std::floor(lambda * static_cast<double>(n))) +
         1;
}

std::string_view skip_reason_name(SkipReason r) {
  switch (r) {
    case SkipReason::kNone:
      return "none";
    case SkipReason::kAlreadyWrong:
      return "already-wrong";
    case SkipReason::kNoEligiblePosition:
      return "no-eligible-position";
    case SkipReason::kBudgetExhausted:
      return "budget-exhausted";
  }
  return "?";
}

std::vector<double> positional_scores(const LogitMatrix& logits,
                                      std::span<const int> target) {
  if (logits.cols() < 2) {
    throw Error("positional scores need at least two vocabulary entries");
  }
  if (logits.rows() != static_cast<Eigen::Index>(target.size())) {
    throw Error("logit rows do not match the target length");
  }
  std::vector<double> scores(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double* row = logits.data() + static_cast<Eigen::Index>(i) * logits.cols();
    const int y = target[i];
    double rival = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < logits.cols(); ++r) {
      if (r != y) rival = std::max(rival, row[r]);
    }
    scores[i] = row[y] - rival;
  }
  return scores;
}

std::vector<std::size_t> eligible_positions(std::u32string_view current,
                                            std::u32string_view target,
                                            std::span<const double> scores,
                                            const AttackConfig& config) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (is_attackable(config.attackable, target[i]) && current[i] == target[i]) {
      out.push_back(i);
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  return out;
}

std::optional<Char> best_confusion_substitute(std::span<const double> row,
                                              Char original,
                                              const ConfusionSet& d,
                                              const Vocab& vocab) {
  std::optional<Char> best;
  int best_id = 0;
  for (Char c : d.candidates(original)) {
    if (!vocab.contains(c)) continue;
    const int id = vocab.id(c);
    const double v = row[static_cast<std::size_t>(id)];
    const double b = row[static_cast<std::size_t>(best_id)];
    if (!best || v > b || (v == b && id < best_id)) {
      best = c;
      best_id = id;
    }
  }
  return best;
}

AttackOutcome attack(const Sentence& x, const Sentence& y, const Scorer& f,
                     const ConfusionSet& d, const AttackConfig& config) {
  config.validate();
  if (x.size() != y.size()) throw Error("attack input and target lengths differ");
  const Vocab& vocab = f.vocab();
  if (vocab.size() < 2) throw Error("attack needs a vocabulary of at least two ids");

  AttackOutcome out;
  out.adversarial = x;
  LogitMatrix logits = f.logits(out.adversarial);
  if (predict_from_logits(logits, vocab) != y) {
    out.skipped = SkipReason::kAlreadyWrong;
    return out;
  }

  const std::vector<int> target_ids = vocab.encode(y);
  const double limit = config.lambda * static_cast<double>(x.size());
  std::size_t count = 0;
  while (true) {
    if (!(static_cast<double>(count) <= limit)) {
      out.skipped = SkipReason::kBudgetExhausted;
      break;
    }
    const auto scores = positional_scores(logits, target_ids);
    bool substituted = false;
    for (std::size_t p :
         eligible_positions(out.adversarial, y, scores, config)) {
      const double* row = logits.data() + static_cast<Eigen::Index>(p) * logits.cols();
      const auto m = best_confusion_substitute(
          {row, static_cast<std::size_t>(logits.cols())}, x[p], d, vocab);
      if (!m) continue;
      out.substitutions.push_back({p, x[p], *m, scores[p]});
      out.adversarial[p] = *m;
      substituted = true;
      break;
    }
    if (!substituted) {
      out.skipped = SkipReason::kNoEligiblePosition;
      break;
    }
    ++count;
    logits = f.logits(out.adversarial);
    if (predict_from_logits(logits, vocab) != y) {
      out.success = true;
      break;
    }
  }
  return out;
}

std::vector<AttackOutcome> attack_corpus(std::span<const SentencePair> pairs,
                                         const Scorer& f, const ConfusionSet& d,
                                         const AttackConfig& config,
                                         std::size_t workers) {
  config.validate();
  std::vector<AttackOutcome> out(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    out[i] = attack(pairs[i].source, pairs[i].target, f, d, config);
  });
  return out;
}

double AttackSummary::success_rate() const {
  const std::size_t attempted = total - already_wrong;
  return attempted == 0 ? 0.0
                        : static_cast<double>(succeeded) /
                              static_cast<double>(attempted);
}

AttackSummary summarize(std::span<const AttackOutcome> outcomes) {
  AttackSummary s;
  s.total = outcomes.size();
  for (const auto& o : outcomes) {
    s.substitutions += o.substitutions.size();
    if (o.success) ++s.succeeded;
    switch (o.skipped) {
      case SkipReason::kAlreadyWrong:
        ++s.already_wrong;
        break;
      case SkipReason::kNoEligiblePosition:
        ++s.no_eligible_position;
        break;
      case SkipReason::kBudgetExhausted:
        ++s.budget_exhausted;
        break;
      case SkipReason::kNone:
        break;
    }
  }
  return s;
}

void write_outcomes_tsv(std::span<const SentencePair> pairs,
                        std::span<const AttackOutcome> outcomes,
                        std::ostream& out) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << encode_utf8(pairs[i].source) << '\t' << encode_utf8(pairs[i].target)
        << '\t' << encode_utf8(outcomes[i].adversarial) << '\t'
        << (outcomes[i].success ? "true" : "false") << '\t'
        << outcomes[i].substitutions.size() << '\n';
  }
}

nlohmann::json outcomes_to_json(std::span<const SentencePair> pairs,
                                std::span<const AttackOutcome> outcomes) {
  auto list = nlohmann::json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AttackOutcome& o = outcomes[i];
    auto subs = nlohmann::json::array();
    for (const auto& s : o.substitutions) {
      subs.push_back({{"position", s.position},
                      {"original", encode_utf8(s.original)},
                      {"replacement", encode_utf8(s.replacement)},
                      {"score", s.score}});
    }
    list.push_back({{"source", encode_utf8(pairs[i].source)},
                    {"target", encode_utf8(pairs[i].target)},
                    {"adversarial", encode_utf8(o.adversarial)},
                    {"success", o.success},
                    {"skipped", skip_reason_name(o.skipped)},
                    {"substitutions", std::move(subs)}});
  }
  return list;
}

}  // namespace advcsc
