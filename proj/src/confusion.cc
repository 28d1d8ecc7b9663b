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

#include "advcsc/confusion.h"

#include <algorithm>
#include <set>

#include "advcsc/io.h"

namespace advcsc {

void ConfusionSet::add(Char key, const Sentence& candidates) {
  std::vector<Char> fresh;
  auto it = entries_.find(key);
  const std::vector<Char>* existing = it == entries_.end() ? nullptr
                                                            : &it->second;
  for (Char c : candidates) {
    if (c == key) {
      ++dropped_self_loops_;
      continue;
    }
    const bool seen =
        std::find(fresh.begin(), fresh.end(), c) != fresh.end() ||
        (existing != nullptr &&
         std::find(existing->begin(), existing->end(), c) != existing->end());
    if (!seen) fresh.push_back(c);
  }
  if (fresh.empty()) return;
  auto& list = entries_[key];
  list.insert(list.end(), fresh.begin(), fresh.end());
}

const std::vector<Char>& ConfusionSet::candidates(Char c) const {
  static const std::vector<Char> kNone;
  auto it = entries_.find(c);
  return it == entries_.end() ? kNone : it->second;
}

std::vector<Char> ConfusionSet::all_characters() const {
  std::set<Char> chars;
  for (const auto& [key, list] : entries_) {
    chars.insert(key);
    chars.insert(list.begin(), list.end());
  }
  return {chars.begin(), chars.end()};
}

ConfusionSet parse_confusion(const std::vector<std::string>& lines,
                             const std::string& source_name) {
  ConfusionSet d;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t lineno = i + 1;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source_name, lineno, "missing tab separator");
    }
    Sentence key, candidates;
    try {
      key = decode_nfc(std::string_view(line).substr(0, tab));
      candidates = decode_nfc(std::string_view(line).substr(tab + 1));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source_name, lineno, e.what());
    }
    if (key.size() != 1) {
      throw ParseError(source_name, lineno,
                       "key must be exactly one character");
    }
    if (candidates.empty()) {
      throw ParseError(source_name, lineno, "empty candidate list");
    }
    d.add(key[0], candidates);
  }
  return d;
}

ConfusionSet load_confusion(const std::string& path) {
  return parse_confusion(read_lines(path), path);
}

void write_confusion(const ConfusionSet& d, std::ostream& out) {
  for (const auto& [key, list] : d.entries()) {
    out << encode_utf8(key) << '\t'
        << encode_utf8(std::u32string_view(list.data(), list.size())) << '\n';
  }
}

}  // namespace advcsc
