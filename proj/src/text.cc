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

#include "advcsc/text.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include <utility>
#include <vector>

namespace advcsc {

ParseError::ParseError(std::string path, std::size_t line,
                       const std::string& what)
    : Error(path + ":" + std::to_string(line) + ": " + what),
      path_(std::move(path)),
      line_(line) {}

Sentence decode_nfc(std::string_view utf8) {
  if (utf8.empty()) return {};
  UErrorCode status = U_ZERO_ERROR;
  int32_t utf16_len = 0;
  u_strFromUTF8(nullptr, 0, &utf16_len, utf8.data(),
                static_cast<int32_t>(utf8.size()), &status);
  if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) {
    throw Error("invalid UTF-8 input");
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString raw;
  UChar* buf = raw.getBuffer(utf16_len);
  u_strFromUTF8(buf, utf16_len, nullptr, utf8.data(),
                static_cast<int32_t>(utf8.size()), &status);
  raw.releaseBuffer(utf16_len);
  if (U_FAILURE(status)) throw Error("invalid UTF-8 input");

  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized = nfc->normalize(raw, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");

  Sentence out;
  out.reserve(static_cast<std::size_t>(normalized.countChar32()));
  for (int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    out.push_back(static_cast<Char>(c));
    i = normalized.moveIndex32(i, 1);
  }
  return out;
}

std::string encode_utf8(Char c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (Char c : text) out += encode_utf8(c);
  return out;
}

bool is_attackable(CharClass cls, Char c) {
  switch (cls) {
    case CharClass::kCjk:
      return c >= 0x4E00 && c <= 0x9FFF;
    case CharClass::kLetters:
      return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
    case CharClass::kAll:
      return true;
  }
  return false;
}

CharClass parse_char_class(std::string_view name) {
  if (name == "cjk") return CharClass::kCjk;
  if (name == "letters") return CharClass::kLetters;
  if (name == "all") return CharClass::kAll;
  throw Error("unknown character class '" + std::string(name) +
              "' (expected cjk, letters or all)");
}

std::string_view char_class_name(CharClass cls) {
  switch (cls) {
    case CharClass::kCjk:
      return "cjk";
    case CharClass::kLetters:
      return "letters";
    case CharClass::kAll:
      return "all";
  }
  return "?";
}

}  // namespace advcsc
