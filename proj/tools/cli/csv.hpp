// Copyright 2026 The lowprev Authors
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

#ifndef LOWPREV_CLI_CSV_HPP
#define LOWPREV_CLI_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lowprev::cli {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

/// A small table written in one go. The first line is a provenance comment.
class CsvTable {
 public:
  CsvTable(std::string config_hash, std::uint64_t seed, std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);

  void write(const std::filesystem::path& path) const;

 private:
  std::string hash_;
  std::uint64_t seed_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace lowprev::cli

#endif  // LOWPREV_CLI_CSV_HPP
