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

#ifndef ADVCSC_CORPUS_H_
#define ADVCSC_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "advcsc/confusion.h"
#include "advcsc/rng.h"
#include "advcsc/text.h"

namespace advcsc {

// Aligned (source, target) sentences of equal length. Error positions are
// where they differ.
struct SentencePair {
  Sentence source;
  Sentence target;

  std::vector<std::size_t> error_positions() const;
  bool has_errors() const { return source != target; }

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

// Dense character <-> id mapping. Id 0 is reserved for unknown characters.
class Vocab {
 public:
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkToken = "<UNK>";

  Vocab();
  // `chars` become ids 1..chars.size() in order. Throws on duplicates.
  explicit Vocab(const std::vector<Char>& chars);

  std::size_t size() const { return chars_.size(); }
  int id(Char c) const;
  bool contains(Char c) const { return index_.count(c) != 0; }
  // kUnkChar for kUnkId.
  Char character(int id) const { return chars_.at(static_cast<std::size_t>(id)); }

  std::vector<int> encode(std::u32string_view s) const;
  Sentence decode(std::span<const int> ids) const;

  // Known characters in id order, without the UNK slot.
  std::vector<Char> characters() const { return {chars_.begin() + 1, chars_.end()}; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.chars_ == b.chars_;
  }

 private:
  std::vector<Char> chars_;
  std::unordered_map<Char, int> index_;
};

// Counts characters over `corpora` and keeps those seen at least `min_count`
// times, plus every character in `forced`. Ids are assigned by frequency
// descending, then code point ascending. Throws Error if corpora is empty or
// min_count < 1.
Vocab build_vocab(const std::vector<Sentence>& corpora, std::size_t min_count,
                  std::span<const Char> forced = {});

// One character per line; line 0 is the UNK token.
void write_vocab(const Vocab& vocab, std::ostream& out);
Vocab load_vocab(const std::string& path);

// Parses `<source>\t<target>` lines (NFC-normalized). Blank lines are
// skipped. Throws ParseError on a missing tab, empty sides or a length
// mismatch.
std::vector<SentencePair> parse_parallel(const std::vector<std::string>& lines,
                                         const std::string& source_name = "<memory>");
std::vector<SentencePair> load_parallel(const std::string& path);
void write_pairs(std::span<const SentencePair> pairs, std::ostream& out);

// Clean corpus: one sentence per line, NFC-normalized, blank lines dropped.
std::vector<Sentence> load_sentences(const std::string& path);

struct CorruptionPolicy {
  double select_rate = 0.25;
  double confusion_prob = 0.9;
  std::uint64_t seed = 0;
  CharClass attackable = CharClass::kCjk;

  // Throws Error when a rate is outside [0, 1].
  void validate() const;
};

struct SynthesisStats {
  std::size_t characters = 0;
  std::size_t attackable = 0;
  std::size_t selected = 0;
  std::size_t replaced = 0;
  std::size_t confusion_replaced = 0;
  std::size_t random_replaced = 0;
  // Replacements at positions whose character has a non-empty confusion list.
  std::size_t replaced_with_candidates = 0;
  std::size_t confusion_replaced_with_candidates = 0;

  SynthesisStats& operator+=(const SynthesisStats& o);
  double replaced_fraction() const;
  double confusion_fraction() const;
};

// Character-substitution corruption for pre-training data. Each attackable
// position is selected with probability select_rate; a selected character
// is replaced by a uniform draw from its confusion candidates with
// probability confusion_prob (or when candidates are empty, by the random
// branch), otherwise by a uniform draw from the attackable vocabulary
// characters other than itself.
class Corruptor {
 public:
  Corruptor(CorruptionPolicy policy, const ConfusionSet& d, const Vocab& vocab);

  SentencePair corrupt(const Sentence& clean, Rng& rng,
                       SynthesisStats* stats = nullptr) const;

  const CorruptionPolicy& policy() const { return policy_; }
  // Attackable vocabulary characters, ascending.
  const std::vector<Char>& random_pool() const { return pool_; }

 private:
  Char random_replacement(Char original, Rng& rng) const;

  CorruptionPolicy policy_;
  const ConfusionSet& confusion_;
  std::vector<Char> pool_;
};

SentencePair synthesize_pair(const Sentence& clean,
                             const CorruptionPolicy& policy,
                             const ConfusionSet& d, const Vocab& vocab,
                             Rng& rng, SynthesisStats* stats = nullptr);

// result[i] is synthesize_pair(lines[i]) with a stream seeded by
// derive_seed(policy.seed, i), so the output is independent of `workers`.
std::vector<SentencePair> synthesize_corpus(const std::vector<Sentence>& lines,
                                            const CorruptionPolicy& policy,
                                            const ConfusionSet& d,
                                            const Vocab& vocab,
                                            std::size_t workers = 1,
                                            SynthesisStats* stats = nullptr);

}  // namespace advcsc

#endif  // ADVCSC_CORPUS_H_
