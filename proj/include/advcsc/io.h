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

#ifndef ADVCSC_IO_H_
#define ADVCSC_IO_H_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace advcsc {

// Reads a text file as lines with the trailing '\r' of CRLF endings removed.
// Throws Error naming the path if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

// Output file that only appears at its final path after commit(). Writes go
// to a sibling temporary which is removed if the object dies uncommitted.
class AtomicOutput {
 public:
  explicit AtomicOutput(std::filesystem::path path, bool binary = false);
  ~AtomicOutput();

  AtomicOutput(const AtomicOutput&) = delete;
  AtomicOutput& operator=(const AtomicOutput&) = delete;

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace advcsc

#endif  // ADVCSC_IO_H_
