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

#include "advcsc/io.h"

#include <system_error>

#include "advcsc/text.h"

namespace advcsc {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

AtomicOutput::AtomicOutput(std::filesystem::path path, bool binary)
    : path_(std::move(path)) {
  tmp_ = path_;
  tmp_ += ".partial";
  out_.open(tmp_, binary ? std::ios::binary | std::ios::trunc
                         : std::ios::out | std::ios::trunc);
  if (!out_) throw Error("cannot write '" + path_.string() + "'");
}

AtomicOutput::~AtomicOutput() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicOutput::commit() {
  out_.flush();
  if (!out_) throw Error("write failed for '" + path_.string() + "'");
  out_.close();
  std::filesystem::rename(tmp_, path_);
  committed_ = true;
}

}  // namespace advcsc
