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

#include <gtest/gtest.h>

#include <sstream>

#include "advcsc/io.h"
#include "advcsc/rng.h"

namespace advcsc {
namespace {

std::vector<Char> chars(std::u32string_view s) { return {s.begin(), s.end()}; }

TEST(ConfusionTest, ParsesOneLine) {
  const ConfusionSet d = parse_confusion({"a\tbc"});
  EXPECT_EQ(d.candidates(U'a'), chars(U"bc"));
}

TEST(ConfusionTest, MergesDuplicateKeysInFirstSeenOrder) {
  const ConfusionSet d = parse_confusion({"a\tb", "a\tc", "a\tbd"});
  EXPECT_EQ(d.candidates(U'a'), chars(U"bcd"));
}

TEST(ConfusionTest, DropsSelfSubstitution) {
  const ConfusionSet d = parse_confusion({"a\tab"});
  EXPECT_EQ(d.candidates(U'a'), chars(U"b"));
  EXPECT_EQ(d.dropped_self_loops(), 1u);
}

TEST(ConfusionTest, KeyWithOnlyItselfIsNotStored) {
  const ConfusionSet d = parse_confusion({"a\ta"});
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.dropped_self_loops(), 1u);
}

TEST(ConfusionTest, AbsentKeyHasNoCandidates) {
  const ConfusionSet d = parse_confusion({"a\tbc"});
  EXPECT_TRUE(d.candidates(U'z').empty());
}

TEST(ConfusionTest, SkipsCommentsAndBlankLines) {
  const ConfusionSet d = parse_confusion({"# visual", "", "中\t申种"});
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.candidates(U'中'), chars(U"申种"));
}

TEST(ConfusionTest, MalformedLinesNameTheLine) {
  try {
    parse_confusion({"a\tb", "ab"}, "conf.tsv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("conf.tsv:2"), std::string::npos);
  }
  EXPECT_THROW(parse_confusion({"ab\tc"}), ParseError);
  EXPECT_THROW(parse_confusion({"\tc"}), ParseError);
  EXPECT_THROW(parse_confusion({"a\t"}), ParseError);
  try {
    parse_confusion({"# c", "a\tb", "x\t"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ConfusionTest, NormalizesKeysToNfc) {
  // Decomposed e-acute as key compares equal to the composed form.
  const ConfusionSet d = parse_confusion({"e\xcc\x81\te"});
  EXPECT_EQ(d.candidates(U'é'), chars(U"e"));
}

TEST(ConfusionTest, LoadReportsMissingFile) {
  EXPECT_THROW(load_confusion("/nonexistent/conf.tsv"), Error);
}

// Serializing and reloading a random set reproduces it exactly, and a second
// pass is a fixed point.
TEST(ConfusionTest, SerializeReloadIsIdempotent) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> lines;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      Sentence cands;
      const std::size_t k = 1 + rng.below(5);
      for (std::size_t j = 0; j < k; ++j) cands.push_back(U'a' + static_cast<Char>(rng.below(8)));
      lines.push_back(encode_utf8(U'a' + static_cast<Char>(rng.below(8))) + "\t" +
                      encode_utf8(cands));
    }
    const ConfusionSet d = parse_confusion(lines);
    std::ostringstream out;
    write_confusion(d, out);
    std::istringstream in(out.str());
    std::vector<std::string> again;
    for (std::string l; std::getline(in, l);) again.push_back(l);
    const ConfusionSet reloaded = parse_confusion(again);
    EXPECT_EQ(reloaded, d);
    for (const auto& [key, list] : reloaded.entries()) {
      EXPECT_FALSE(list.empty());
      for (Char c : list) EXPECT_NE(c, key);
    }
  }
}

}  // namespace
}  // namespace advcsc
