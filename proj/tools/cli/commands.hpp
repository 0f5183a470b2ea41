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

#ifndef LOWPREV_CLI_COMMANDS_HPP
#define LOWPREV_CLI_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace lowprev::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kNumericalFailure = 3,
  kDiagnosticViolation = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "lowprev-out";
  unsigned threads = 1;
};

/// Each command writes its CSVs into `out` and returns an exit code. Wall times go to timings.csv only.
int cmd_plain(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_iterate(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_direct_ci(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_diagnose(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);

/// Loads the config, applies --seed, creates the output directory and maps errors to exit codes.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& log);

}  // namespace lowprev::cli

#endif  // LOWPREV_CLI_COMMANDS_HPP
