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

#include "advcsc/corpus.h"

#include <algorithm>
#include <map>

#include "advcsc/io.h"
#include "advcsc/parallel.h"

namespace advcsc {

std::vector<std::size_t> SentencePair::error_positions() const {
  std::vector<std::size_t> out;
  const std::size_t n = std::min(source.size(), target.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (source[i] != target[i]) out.push_back(i);
  }
  return out;
}

Vocab::Vocab() : chars_{kUnkChar} {}

Vocab::Vocab(const std::vector<Char>& chars) : Vocab() {
  chars_.reserve(chars.size() + 1);
  for (Char c : chars) {
    if (c == kUnkChar || !index_.emplace(c, static_cast<int>(chars_.size())).second) {
      throw Error("duplicate or reserved character in vocabulary: U+" +
                  std::to_string(static_cast<std::uint32_t>(c)));
    }
    chars_.push_back(c);
  }
}

int Vocab::id(Char c) const {
  auto it = index_.find(c);
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<int> Vocab::encode(std::u32string_view s) const {
  std::vector<int> ids(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ids[i] = id(s[i]);
  return ids;
}

Sentence Vocab::decode(std::span<const int> ids) const {
  Sentence s(ids.size(), kUnkChar);
  for (std::size_t i = 0; i < ids.size(); ++i) s[i] = character(ids[i]);
  return s;
}

Vocab build_vocab(const std::vector<Sentence>& corpora, std::size_t min_count,
                  std::span<const Char> forced) {
  if (corpora.empty()) throw Error("cannot build a vocabulary from no text");
  if (min_count < 1) throw Error("min_count must be at least 1");
  std::map<Char, std::size_t> counts;
  for (const auto& s : corpora) {
    for (Char c : s) ++counts[c];
  }
  std::vector<std::pair<Char, std::size_t>> kept;
  for (const auto& [c, n] : counts) {
    if (n >= min_count) kept.emplace_back(c, n);
  }
  for (Char c : forced) {
    auto it = counts.find(c);
    if (it == counts.end()) {
      kept.emplace_back(c, 0);
      counts.emplace(c, 0);
    } else if (it->second < min_count) {
      kept.emplace_back(c, it->second);
      it->second = min_count;  // guards against a second forced copy
    }
  }
  std::erase_if(kept, [](const auto& e) { return e.first == kUnkChar; });
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  kept.erase(std::unique(kept.begin(), kept.end(),
                         [](const auto& a, const auto& b) {
                           return a.first == b.first;
                         }),
             kept.end());
  std::vector<Char> chars;
  chars.reserve(kept.size());
  for (const auto& e : kept) chars.push_back(e.first);
  return Vocab(chars);
}

void write_vocab(const Vocab& vocab, std::ostream& out) {
  out << Vocab::kUnkToken << '\n';
  for (Char c : vocab.characters()) out << encode_utf8(c) << '\n';
}

Vocab load_vocab(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != Vocab::kUnkToken) {
    throw ParseError(path, 1, "vocabulary must start with <UNK>");
  }
  std::vector<Char> chars;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Sentence s = decode_nfc(lines[i]);
    if (s.size() != 1) {
      throw ParseError(path, i + 1, "expected exactly one character");
    }
    chars.push_back(s[0]);
  }
  return Vocab(chars);
}

std::vector<SentencePair> parse_parallel(const std::vector<std::string>& lines,
                                         const std::string& source_name) {
  std::vector<SentencePair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t lineno = i + 1;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source_name, lineno, "missing tab separator");
    }
    SentencePair p;
    try {
      p.source = decode_nfc(std::string_view(line).substr(0, tab));
      p.target = decode_nfc(std::string_view(line).substr(tab + 1));
    } catch (const Error& e) {
      throw ParseError(source_name, lineno, e.what());
    }
    if (p.source.empty() || p.target.empty()) {
      throw ParseError(source_name, lineno, "empty sentence");
    }
    if (p.source.size() != p.target.size()) {
      throw ParseError(source_name, lineno,
                       "source has " + std::to_string(p.source.size()) +
                           " characters but target has " +
                           std::to_string(p.target.size()));
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<SentencePair> load_parallel(const std::string& path) {
  return parse_parallel(read_lines(path), path);
}

void write_pairs(std::span<const SentencePair> pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    out << encode_utf8(p.source) << '\t' << encode_utf8(p.target) << '\n';
  }
}

std::vector<Sentence> load_sentences(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      out.push_back(decode_nfc(lines[i]));
    } catch (const Error& e) {
      throw ParseError(path, i + 1, e.what());
    }
  }
  return out;
}

void CorruptionPolicy::validate() const {
  if (!(select_rate >= 0.0 && select_rate <= 1.0)) {
    throw Error("select_rate must lie in [0, 1]");
  }
  if (!(confusion_prob >= 0.0 && confusion_prob <= 1.0)) {
    throw Error("confusion_prob must lie in [0, 1]");
  }
}

SynthesisStats& SynthesisStats::operator+=(const SynthesisStats& o) {
  characters += o.characters;
  attackable += o.attackable;
  selected += o.selected;
  replaced += o.replaced;
  confusion_replaced += o.confusion_replaced;
  random_replaced += o.random_replaced;
  replaced_with_candidates += o.replaced_with_candidates;
  confusion_replaced_with_candidates += o.confusion_replaced_with_candidates;
  return *this;
}

double SynthesisStats::replaced_fraction() const {
  return attackable == 0 ? 0.0
                         : static_cast<double>(replaced) /
                               static_cast<double>(attackable);
}

double SynthesisStats::confusion_fraction() const {
  return replaced_with_candidates == 0
             ? 0.0
             : static_cast<double>(confusion_replaced_with_candidates) /
                   static_cast<double>(replaced_with_candidates);
}

Corruptor::Corruptor(CorruptionPolicy policy, const ConfusionSet& d,
                     const Vocab& vocab)
    : policy_(policy), confusion_(d) {
  policy_.validate();
  for (Char c : vocab.characters()) {
    if (is_attackable(policy_.attackable, c)) pool_.push_back(c);
  }
  std::sort(pool_.begin(), pool_.end());
}

Char Corruptor::random_replacement(Char original, Rng& rng) const {
  const auto it = std::lower_bound(pool_.begin(), pool_.end(), original);
  const bool in_pool = it != pool_.end() && *it == original;
  const std::size_t m = pool_.size() - (in_pool ? 1 : 0);
  if (m == 0) return original;
  std::size_t k = rng.below(m);
  if (in_pool && k >= static_cast<std::size_t>(it - pool_.begin())) ++k;
  return pool_[k];
}

SentencePair Corruptor::corrupt(const Sentence& clean, Rng& rng,
                                SynthesisStats* stats) const {
  SentencePair pair{clean, clean};
  SynthesisStats local;
  local.characters = clean.size();
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Char c = clean[i];
    if (!is_attackable(policy_.attackable, c)) continue;
    ++local.attackable;
    if (!rng.bernoulli(policy_.select_rate)) continue;
    ++local.selected;
    const auto& candidates = confusion_.candidates(c);
    const bool use_confusion = rng.bernoulli(policy_.confusion_prob);
    Char replacement;
    bool from_confusion = false;
    if (use_confusion && !candidates.empty()) {
      replacement = candidates[rng.below(candidates.size())];
      from_confusion = true;
    } else {
      replacement = random_replacement(c, rng);
    }
    if (replacement == c) continue;
    pair.source[i] = replacement;
    ++local.replaced;
    if (from_confusion) {
      ++local.confusion_replaced;
    } else {
      ++local.random_replaced;
    }
    if (!candidates.empty()) {
      ++local.replaced_with_candidates;
      if (from_confusion) ++local.confusion_replaced_with_candidates;
    }
  }
  if (stats != nullptr) *stats += local;
  return pair;
}

SentencePair synthesize_pair(const Sentence& clean,
                             const CorruptionPolicy& policy,
                             const ConfusionSet& d, const Vocab& vocab,
                             Rng& rng, SynthesisStats* stats) {
  return Corruptor(policy, d, vocab).corrupt(clean, rng, stats);
}

std::vector<SentencePair> synthesize_corpus(const std::vector<Sentence>& lines,
                                            const CorruptionPolicy& policy,
                                            const ConfusionSet& d,
                                            const Vocab& vocab,
                                            std::size_t workers,
                                            SynthesisStats* stats) {
  const Corruptor corruptor(policy, d, vocab);
  std::vector<SentencePair> out(lines.size());
  std::vector<SynthesisStats> per_line(stats != nullptr ? lines.size() : 0);
  parallel_for(lines.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(policy.seed, i));
    out[i] = corruptor.corrupt(lines[i], rng,
                               stats != nullptr ? &per_line[i] : nullptr);
  });
  if (stats != nullptr) {
    for (const auto& s : per_line) *stats += s;
  }
  return out;
}

}  // namespace advcsc
