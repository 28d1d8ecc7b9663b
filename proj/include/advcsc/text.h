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

#ifndef ADVCSC_TEXT_H_
#define ADVCSC_TEXT_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace advcsc {

// A character is one Unicode scalar value; sentences are sequences of them.
using Char = char32_t;
using Sentence = std::u32string;

// Stands in for the UNK id whenever a prediction has to be rendered as text.
inline constexpr Char kUnkChar = U'�';

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Error tied to a line of an input file (1-based).
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what);

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Decodes UTF-8 and normalizes to NFC. Throws Error on ill-formed input.
Sentence decode_nfc(std::string_view utf8);

std::string encode_utf8(std::u32string_view text);
std::string encode_utf8(Char c);

// Which characters an attack or corruption may touch.
enum class CharClass {
  kCjk,      // CJK Unified Ideographs, U+4E00..U+9FFF
  kLetters,  // ASCII letters
  kAll,
};

bool is_attackable(CharClass cls, Char c);

// Parses "cjk" | "letters" | "all".
CharClass parse_char_class(std::string_view name);
std::string_view char_class_name(CharClass cls);

}  // namespace advcsc

#endif  // ADVCSC_TEXT_H_
