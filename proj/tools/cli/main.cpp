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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lowprev: lower previsions by envelopes of importance sampling estimates"};
  app.require_subcommand(1);

  lowprev::cli::CommandOptions options;
  std::uint64_t seed = 0;
  for (const auto& [name, help] : {std::pair{"plain", "fast-variant intervals for one or more (N, n)"},
                                   std::pair{"iterate", "iterative importance sampling, then an interval"},
                                   std::pair{"diagnose", "run the diagnostics listed in [diagnose] run"},
                                   std::pair{"direct-ci", "t-interval from N * n direct draws at the sampling mean"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--out", options.out, "output directory")->capture_default_str();
    sub->add_option("--threads", options.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lowprev::cli::kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) options.seed = seed;
  return lowprev::cli::run_command(chosen->get_name(), options, std::cerr);
}
