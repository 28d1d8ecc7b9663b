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

#ifndef ADVCSC_CONFUSION_H_
#define ADVCSC_CONFUSION_H_

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "advcsc/text.h"

namespace advcsc {

// Characters a given character is plausibly mistyped as. Candidate lists keep
// first-seen order, are duplicate-free, never contain their own key and are
// never empty. Immutable after construction.
class ConfusionSet {
 public:
  ConfusionSet() = default;

  // Adds candidates for `key`, merging with any existing list. Self
  // substitutions are dropped and counted.
  void add(Char key, const Sentence& candidates);

  // Stored list for `c`, or an empty list when c is not a key.
  const std::vector<Char>& candidates(Char c) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<Char, std::vector<Char>>& entries() const { return entries_; }

  // Number of self-substitution candidates removed while loading.
  std::size_t dropped_self_loops() const { return dropped_self_loops_; }

  // Every key and candidate character, ascending.
  std::vector<Char> all_characters() const;

  friend bool operator==(const ConfusionSet& a, const ConfusionSet& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::map<Char, std::vector<Char>> entries_;
  std::size_t dropped_self_loops_ = 0;
};

// Parses `<key>\t<candidates>` lines; '#' starts a comment line and blank
// lines are ignored. Input is NFC-normalized. Throws ParseError on a missing
// tab, a key that is not exactly one character, or an empty candidate field.
ConfusionSet parse_confusion(const std::vector<std::string>& lines,
                             const std::string& source_name = "<memory>");
ConfusionSet load_confusion(const std::string& path);

// Writes the set in the same line format, keys ascending.
void write_confusion(const ConfusionSet& d, std::ostream& out);

}  // namespace advcsc

#endif  // ADVCSC_CONFUSION_H_
