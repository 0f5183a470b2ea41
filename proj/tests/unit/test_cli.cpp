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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <lowprev/error.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"

namespace lowprev::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kConfigs = LOWPREV_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Long-format CSV (quantity,value) or the first data column of a wide one.
std::map<std::string, std::string> long_csv(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);  // provenance
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const auto next = line.find(',', comma + 1);
    out[line.substr(0, comma)] = line.substr(comma + 1, next == std::string::npos ? std::string::npos : next - comma - 1);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string field;
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lowprev_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& command, const fs::path& config, const fs::path& out, unsigned threads = 1,
          std::optional<std::uint64_t> seed = std::nullopt) {
    CommandOptions o;
    o.config = config;
    o.out = out;
    o.threads = threads;
    o.seed = seed;
    log_.str("");
    return run_command(command, o, log_);
  }

  fs::path dir_;
  std::ostringstream log_;
};

const char* kSmallDirichlet = R"([model]
k = 5
s = 2
lb = 0.1
sampling_t = uniform

[gamble]
kind = linear
coefficients = 1 2 5 4 -3

[run]
seed = 7
N = 4
n = 16
)";

TEST(Config, ParsesGoldenConfigs) {
  for (const char* name : {"dirichlet_plain.ini", "dirichlet_iterate.ini", "dirichlet_iterate_fast.ini",
                           "dirichlet_direct.ini", "entropy_iterate.ini", "entropy_iterate_fast.ini",
                           "entropy_direct.ini", "diagnose.ini"}) {
    EXPECT_NO_THROW(load_config(kConfigs / name)) << name;
  }
  const auto c = load_config(kConfigs / "dirichlet_plain.ini");
  EXPECT_EQ(c.model.lower_bounds, std::vector<double>(5, 0.1));
  EXPECT_EQ(c.run.seed, 20190101U);
  ASSERT_EQ(c.run.plain_sizes.size(), 6U);
  EXPECT_EQ(c.run.plain_sizes.back(), (std::pair<std::size_t, std::size_t>{128, 128}));
  EXPECT_EQ(c.hash.size(), 16U);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(kSmallDirichlet);
  EXPECT_EQ(c.run.replications, 4U);
  EXPECT_EQ(c.run.sample_size, 16U);
  EXPECT_DOUBLE_EQ(c.run.level, 0.95);
  EXPECT_DOUBLE_EQ(c.run.ess_fraction, 0.95);
  EXPECT_EQ(c.run.max_iter, 10U);
  EXPECT_EQ(c.gamble.coefficients, (std::vector<double>{1, 2, 5, 4, -3}));
  for (double v : c.model.sampling_t) EXPECT_DOUBLE_EQ(v, 0.2);
}

void expect_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config(text);
    ADD_FAILURE() << "expected an error containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Config, ErrorsNameTheField) {
  const std::string base = kSmallDirichlet;
  expect_error(base + "max_iter = 0\n", "run.max_iter: no iterations permitted");
  expect_error(base + "level = 1.5\n", "run.level");
  expect_error(base + "mode = slow\n", "run.mode");
  expect_error(base + "bogus = 1\n", "run.bogus: unknown key");
  expect_error(base + "stability_replications = x\n", "run.stability_replications");
  expect_error("[model]\nk = 2\ns = 2\nlb = 0.6 0.6\n[gamble]\nkind = entropy\n", "model.lb");
  expect_error("[model]\nk = 2\nlb = 0.1\n[gamble]\nkind = entropy\n", "model.s");
  expect_error("[model]\nk = 3\ns = 2\nlb = 0.1\n[gamble]\nkind = linear\ncoefficients = 1 2\n", "gamble.coefficients");
  expect_error("[model]\nk = 3\ns = 2\nlb = 0.1\n[gamble]\nkind = cubic\n", "gamble.kind");
  expect_error(base + "[diagnose]\nrun = d1 nonsense\n",
               "unknown diagnostic 'nonsense'; valid names are d1, bias, coherence, two-level, consistency");
}

TEST(Config, HashTracksBytes) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  const auto a = parse_config(kSmallDirichlet);
  const auto b = parse_config(std::string(kSmallDirichlet) + "; comment\n");
  EXPECT_NE(a.hash, b.hash);
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.6), "-0.6");
  EXPECT_EQ(format_number(128.0), "128");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST_F(CliTest, ProvenanceHeaderOnEveryCsv) {
  const auto cfg = write_config("small.ini", kSmallDirichlet);
  ASSERT_EQ(run("plain", cfg, dir_ / "out"), kSuccess) << log_.str();
  const std::string hash = fnv1a_hex(slurp(cfg));
  for (const auto& entry : fs::directory_iterator(dir_ / "out")) {
    std::istringstream in(slurp(entry.path()));
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "# lowprev config_hash=" + hash + " seed=7") << entry.path();
  }
  ASSERT_EQ(run("plain", cfg, dir_ / "out2", 1, 99), kSuccess);
  std::istringstream in(slurp(dir_ / "out2" / "plain.csv"));
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# lowprev config_hash=" + hash + " seed=99");
}

TEST_F(CliTest, PlainTinySizesRun) {
  const auto cfg = write_config("tiny.ini", std::string(kSmallDirichlet) + "sizes = 4\n");
  ASSERT_EQ(run("plain", cfg, dir_ / "out"), kSuccess) << log_.str();
  const auto rows = long_csv(dir_ / "out" / "plain.csv");
  EXPECT_EQ(rows.at("N"), "4");
  EXPECT_EQ(rows.at("n"), "4");
  EXPECT_TRUE(std::isfinite(std::stod(rows.at("lower_bound"))));
  EXPECT_TRUE(std::isfinite(std::stod(rows.at("upper_bound"))));
}

TEST_F(CliTest, PlainZeroGambleGivesZeroBounds) {
  std::string text = kSmallDirichlet;
  text.replace(text.find("1 2 5 4 -3"), 10, "0 0 0 0 0");
  const auto cfg = write_config("zero.ini", text + "sizes = 4 8:16\nbeta = 0.1\n");
  ASSERT_EQ(run("plain", cfg, dir_ / "out"), kSuccess) << log_.str();
  std::istringstream in(slurp(dir_ / "out" / "plain.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  bool saw = false;
  while (std::getline(in, line)) {
    const auto cells = split(line, ',');
    if (cells[0] == "lower_bound" || cells[0] == "upper_bound") {
      saw = true;
      for (std::size_t i = 1; i < cells.size(); ++i) EXPECT_EQ(cells[i], "0") << line;
    }
  }
  EXPECT_TRUE(saw);
}

TEST_F(CliTest, PlainGoldenEssRange) {
  ASSERT_EQ(run("plain", kConfigs / "dirichlet_plain.ini", dir_ / "out"), kSuccess) << log_.str();
  std::istringstream in(slurp(dir_ / "out" / "plain.csv"));
  std::string line;
  std::vector<std::string> n_row;
  std::vector<std::string> ess_row;
  while (std::getline(in, line)) {
    auto cells = split(line, ',');
    if (cells[0] == "n") n_row = cells;
    if (cells[0] == "ess_bar") ess_row = cells;
  }
  ASSERT_EQ(n_row.back(), "128");
  const double ess = std::stod(ess_row.back());
  EXPECT_GE(ess, 10.0);
  EXPECT_LE(ess, 25.0);
}

TEST_F(CliTest, IterateDirichletGolden) {
  ASSERT_EQ(run("iterate", kConfigs / "dirichlet_iterate.ini", dir_ / "out"), kSuccess) << log_.str();
  const auto ci = long_csv(dir_ / "out" / "interval.csv");
  const double lo = std::stod(ci.at("lower_bound"));
  const double hi = std::stod(ci.at("upper_bound"));
  EXPECT_LE(lo, -0.6);
  EXPECT_GE(hi, -0.6);
  EXPECT_LE(hi - lo, 0.12);
  EXPECT_EQ(ci.at("terminated_by"), "ess_saturation");
  EXPECT_EQ(ci.at("method"), "exact");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "iterations.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "timings.csv"));
}

TEST_F(CliTest, IterateEntropyGolden) {
  for (const char* name : {"entropy_iterate.ini", "entropy_iterate_fast.ini"}) {
    ASSERT_EQ(run("iterate", kConfigs / name, dir_ / name), kSuccess) << log_.str();
    const auto ci = long_csv(dir_ / name / "interval.csv");
    EXPECT_LE(std::stod(ci.at("lower_bound")), 0.5639683) << name;
    EXPECT_GE(std::stod(ci.at("upper_bound")), 0.5639683) << name;
  }
}

TEST_F(CliTest, IterateFastFallsBackOrUsesDirect) {
  ASSERT_EQ(run("iterate", kConfigs / "dirichlet_iterate_fast.ini", dir_ / "out"), kSuccess) << log_.str();
  const auto ci = long_csv(dir_ / "out" / "interval.csv");
  EXPECT_EQ(ci.at("fell_back"), "false");
  EXPECT_EQ(ci.at("method"), "direct");
  EXPECT_LE(std::stod(ci.at("lower_bound")), -0.6);
  EXPECT_GE(std::stod(ci.at("upper_bound")), -0.6);
}

TEST_F(CliTest, DirectCi) {
  ASSERT_EQ(run("direct-ci", kConfigs / "entropy_direct.ini", dir_ / "out"), kSuccess) << log_.str();
  const auto ci = long_csv(dir_ / "out" / "direct.csv");
  EXPECT_LE(std::stod(ci.at("lower_bound")), 0.5639683);
  EXPECT_GE(std::stod(ci.at("upper_bound")), 0.5639683);
}

TEST_F(CliTest, DiagnoseGolden) {
  ASSERT_EQ(run("diagnose", kConfigs / "diagnose.ini", dir_ / "out"), kSuccess) << log_.str();
  for (const char* f : {"d1.csv", "d1_scaling.csv", "bias.csv", "coherence.csv", "coherence_violations.csv",
                        "two_level.csv", "consistency.csv", "timings.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  // The bias slope column is the same on every row.
  std::istringstream in(slurp(dir_ / "out" / "bias.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  ASSERT_EQ(split(line, ',').back(), "slope");
  std::getline(in, line);
  const double slope = std::stod(split(line, ',').back());
  EXPECT_GE(slope, -0.65);
  EXPECT_LE(slope, -0.35);
  // No self-normalised grid violations.
  std::istringstream v(slurp(dir_ / "out" / "coherence_violations.csv"));
  while (std::getline(v, line)) EXPECT_EQ(line.rfind("self_normalised,grid", 0), std::string::npos) << line;
}

TEST_F(CliTest, DiagnoseViolationExitCode) {
  // A zero slope band cannot be met.
  const auto cfg = write_config(
      "bad.ini", std::string(kSmallDirichlet) + "[diagnose]\nrun = bias\n[bias]\nsampling_s = 1\nsizes = 16 64\n"
                                                "replications = 20\nslope_min = 0.5\nslope_max = 0.6\n");
  EXPECT_EQ(run("diagnose", cfg, dir_ / "out"), kDiagnosticViolation) << log_.str();
  EXPECT_TRUE(fs::exists(dir_ / "out" / "bias.csv"));
}

TEST_F(CliTest, DiagnoseEmptyListIsAnError) {
  const auto cfg = write_config("empty.ini", kSmallDirichlet);
  EXPECT_EQ(run("diagnose", cfg, dir_ / "out"), kConfigError);
  EXPECT_NE(log_.str().find("diagnos"), std::string::npos) << log_.str();
}

TEST_F(CliTest, ConfigErrorExitCode) {
  const auto cfg = write_config("bad.ini", std::string(kSmallDirichlet) + "max_iter = 0\n");
  EXPECT_EQ(run("iterate", cfg, dir_ / "out"), kConfigError);
  EXPECT_NE(log_.str().find("no iterations permitted"), std::string::npos) << log_.str();
  EXPECT_EQ(run("plain", dir_ / "missing.ini", dir_ / "out"), kConfigError);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  // Shapes s * t_j below the smallest normal double make the gamma variates degenerate.
  std::string text = kSmallDirichlet;
  text.replace(text.find("sampling_t = uniform"), 20, "sampling_t = uniform\nsampling_s = 1e-308");
  const auto cfg = write_config("tiny_s.ini", text);
  EXPECT_EQ(run("plain", cfg, dir_ / "out"), kNumericalFailure) << log_.str();
}

TEST_F(CliTest, ByteIdenticalAcrossRunsAndThreads) {
  struct Case {
    const char* command;
    const char* config;
  };
  const Case cases[] = {{"plain", "dirichlet_plain.ini"},
                        {"iterate", "entropy_iterate.ini"},
                        {"iterate", "dirichlet_iterate_fast.ini"},
                        {"direct-ci", "dirichlet_direct.ini"},
                        {"diagnose", "diagnose.ini"}};
  for (const auto& c : cases) {
    const fs::path a = dir_ / (std::string(c.config) + ".1");
    const fs::path b = dir_ / (std::string(c.config) + ".2");
    const fs::path t = dir_ / (std::string(c.config) + ".3");
    ASSERT_EQ(run(c.command, kConfigs / c.config, a, 1), kSuccess) << log_.str();
    ASSERT_EQ(run(c.command, kConfigs / c.config, b, 1), kSuccess);
    ASSERT_EQ(run(c.command, kConfigs / c.config, t, 3), kSuccess);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (name == "timings.csv") continue;
      EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << c.config << " " << name;
      EXPECT_EQ(slurp(entry.path()), slurp(t / name)) << c.config << " " << name << " (threads)";
      ++compared;
    }
    EXPECT_GT(compared, 0U);
  }
}

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, ExecutableArgumentHandling) {
  const std::string tool = LOWPREV_TOOL_PATH;
  const auto cfg = write_config("small.ini", kSmallDirichlet);
  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(shell(tool + " plain --config " + cfg.string() + " --out " + (dir_ / "x").string() + quiet), 0);
  EXPECT_TRUE(fs::exists(dir_ / "x" / "plain.csv"));
  EXPECT_EQ(shell(tool + " plain --config " + (dir_ / "nope.ini").string() + quiet), kConfigError);
  EXPECT_EQ(shell(tool + " plain" + quiet), kConfigError);
  EXPECT_EQ(shell(tool + " frobnicate --config " + cfg.string() + quiet), kConfigError);
  EXPECT_EQ(shell(tool + " plain --config " + cfg.string() + " --threads 0" + quiet), kConfigError);
  EXPECT_EQ(shell(tool + " --help" + quiet), 0);
}

}  // namespace
}  // namespace lowprev::cli
