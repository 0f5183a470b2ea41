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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include <lowprev/confint.hpp>
#include <lowprev/diagnostics.hpp>
#include <lowprev/error.hpp>
#include <lowprev/iterate.hpp>
#include <lowprev/rng.hpp>
#include <lowprev/sampling.hpp>

#include "csv.hpp"

namespace lowprev::cli {

namespace {

using Clock = std::chrono::steady_clock;
using lowprev::cli::format_number;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string count(std::size_t v) { return std::to_string(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

const char* method_name(IntervalMethod m) {
  switch (m) {
    case IntervalMethod::exact:
      return "exact";
    case IntervalMethod::fast:
      return "fast";
    case IntervalMethod::direct:
      return "direct";
  }
  return "unknown";
}

LowerPrevisionProblem problem_of(const ExperimentConfig& c) {
  return {c.model.feasible(), c.model.concentration, c.gamble.build()};
}

void require_sizes(const RunSpec& run) {
  if (run.replications < 2) throw_domain_error("run.N: must be at least 2");
  if (run.sample_size < 2) throw_domain_error("run.n: must be at least 2");
}

class Timings {
 public:
  void add(std::string stage, double seconds) { rows_.emplace_back(std::move(stage), seconds); }

  void write(const ExperimentConfig& c, const CommandOptions& o) const {
    CsvTable t(c.hash, c.run.seed, {"stage", "seconds"});
    for (const auto& [stage, s] : rows_) t.add_row({stage, format_number(s)});
    t.write(o.out / "timings.csv");
  }

 private:
  std::vector<std::pair<std::string, double>> rows_;
};

void add_interval_rows(CsvTable& t, const ConfidenceInterval& ci, double beta) {
  auto row = [&](const std::string& q, const std::string& v) { t.add_row({q, v}); };
  row("method", method_name(ci.method));
  row("N", count(ci.replications));
  row("n", count(ci.sample_size));
  row("level", format_number(ci.level));
  row("lower_bound", format_number(ci.lo));
  row("upper_bound", format_number(ci.hi));
  row("mean_lower", format_number(ci.mean_lower));
  row("mean_upper", format_number(ci.mean_upper));
  row("sd_lower", format_number(ci.sd_lower));
  row("sd_upper", format_number(ci.sd_upper));
  for (std::size_t j = 0; j < ci.mean_tau.size(); ++j) row("tau_bar_" + count(j + 1), format_number(ci.mean_tau[j]));
  row("ess_bar", format_number(ci.mean_ess));
  row("empty", flag(ci.empty));
  if (beta > 0.0) {
    const ConfidenceInterval wide = confidence_interval_biased(ci, beta);
    row("beta", format_number(beta));
    row("lower_bound_biased", format_number(wide.lo));
    row("upper_bound_biased", format_number(wide.hi));
  }
}

void write_trace(const ExperimentConfig& c, const CommandOptions& o, const IterationTrace& trace) {
  const std::size_t k = c.model.lower_bounds.size();
  std::vector<std::string> cols{"iteration", "ess", "value"};
  for (std::size_t j = 0; j < k; ++j) cols.push_back("t_in_" + count(j + 1));
  for (std::size_t j = 0; j < k; ++j) cols.push_back("tau_" + count(j + 1));
  cols.push_back("optimizer_evals");
  CsvTable t(c.hash, c.run.seed, cols);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    std::vector<std::string> row{count(i + 1), format_number(r.ess), format_number(r.value)};
    for (double v : r.t_in) row.push_back(format_number(v));
    for (double v : r.tau_out) row.push_back(format_number(v));
    row.push_back(count(r.optimizer_evals));
    t.add_row(std::move(row));
  }
  t.write(o.out / "iterations.csv");
}

// Distinct seeds per diagnostic so selecting a subset does not change the others.
std::uint64_t study_seed(std::uint64_t seed, std::uint32_t which) {
  return derive_seed(seed, 0, Stream::diagnostic(0x10000U + which));
}

bool run_d1(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  const D1Spec& d = c.diagnose.d1;
  const std::uint64_t seed = study_seed(c.run.seed, 1);
  const auto grid = resolve_grid(d.study, seed);
  const Gamble g = d.study.gamble.build();
  const DirichletParams q = make_dirichlet(d.study.sampling_concentration, d.study.sampling_t);

  std::vector<ResidualProcessSample> samples;
  for (std::size_t m = 0; m < d.sizes.size(); ++m) {
    ResidualSettings rs{q, d.sizes[m], d.replications, derive_seed(seed, m, Stream::diagnostic(1)), d.independent,
                        o.threads};
    samples.push_back(sample_residual_process(g, d.study.concentration, grid, rs));
  }

  CsvTable pairs(c.hash, c.run.seed, {"n", "i", "j", "distance", "standard_error", "scaled_distance"});
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const double dist = empirical_d1(s, i, j);
        pairs.add_row({count(s.sample_size), count(i), count(j), format_number(dist),
                       format_number(empirical_d1_standard_error(s, i, j)),
                       format_number(std::sqrt(static_cast<double>(s.sample_size)) * dist)});
      }
    }
  }
  pairs.write(o.out / "d1.csv");

  const ResidualProcessSample* base = nullptr;
  for (const auto& s : samples) {
    if (s.sample_size == 1) base = &s;
  }
  bool ok = true;
  CsvTable scaling(c.hash, c.run.seed, {"n", "max_relative_deviation"});
  for (const auto& s : samples) {
    if (&s == base) continue;
    const double dev = scaling_check_dn(s, *base);
    scaling.add_row({count(s.sample_size), format_number(dev)});
    if (dev > d.max_deviation) {
      log << "d1: relative deviation " << dev << " at n = " << s.sample_size << " exceeds " << d.max_deviation << '\n';
      ok = false;
    }
  }
  scaling.write(o.out / "d1_scaling.csv");
  return ok;
}

bool run_bias(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  const BiasSpec& b = c.diagnose.bias;
  const std::uint64_t seed = study_seed(c.run.seed, 2);
  const auto grid = resolve_grid(b.study, seed);
  BiasScalingSettings bs{make_dirichlet(b.study.sampling_concentration, b.study.sampling_t), b.sizes, b.replications,
                         seed, o.threads};
  const ScalingTable table = empirical_bias_scaling(b.study.gamble.build(), b.study.concentration, grid, bs);
  CsvTable t(c.hash, c.run.seed, {"n", "mean_error", "mean_abs_error", "standard_error", "exact_value", "slope"});
  for (const auto& r : table.rows) {
    t.add_row({count(r.sample_size), format_number(r.mean_error), format_number(r.mean_abs_error),
               format_number(r.standard_error), format_number(table.exact_value), format_number(table.slope)});
  }
  t.write(o.out / "bias.csv");
  if (b.sizes.size() >= 2 && !(table.slope >= b.slope_min && table.slope <= b.slope_max)) {
    log << "bias: slope " << table.slope << " outside [" << b.slope_min << ", " << b.slope_max << "]\n";
    return false;
  }
  return true;
}

bool run_coherence(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  const CoherenceSpec& h = c.diagnose.coherence;
  const std::uint64_t seed = study_seed(c.run.seed, 3);
  const std::size_t k = h.study.lower_bounds.size();
  const DirichletParams q = make_dirichlet(h.study.sampling_concentration, h.study.sampling_t);
  const SampleBatch batch = sample_dirichlet(q, h.sample_size, derive_seed(seed, 0, Stream::diagnostic(0)));
  const auto pairs = random_linear_gamble_pairs(h.pairs, k, derive_seed(seed, 0, Stream::diagnostic(1)));

  CoherenceAuditSettings settings;
  settings.grid = resolve_grid(h.study, seed);
  settings.scale = h.scale;
  settings.shift = h.shift;
  settings.tolerance = h.tolerance;

  CsvTable summary(c.hash, c.run.seed, {"estimator", "mode", "property", "evaluated", "violations", "max_magnitude"});
  CsvTable detail(c.hash, c.run.seed, {"estimator", "mode", "property", "pair", "magnitude"});
  auto record = [&](const char* estimator, const char* mode, const CoherenceReport& report) {
    for (const auto& ch : report.checks) {
      summary.add_row({estimator, mode, ch.property, count(ch.evaluated), count(ch.violations),
                       format_number(ch.max_magnitude)});
    }
    for (const auto& v : report.violations) {
      detail.add_row({estimator, mode, v.property, count(v.pair), format_number(v.magnitude)});
    }
  };

  const CoherenceReport sn = coherence_audit(batch, h.study.concentration, pairs, settings);
  record("self_normalised", "grid", sn);
  settings.estimator = AuditEstimator::standard;
  record("standard", "grid", coherence_audit(batch, h.study.concentration, pairs, settings));
  if (h.optimizer_audit) {
    CoherenceAuditSettings opt = settings;
    opt.estimator = AuditEstimator::self_normalised;
    opt.mode = AuditMode::optimizer;
    opt.feasible = h.study.feasible();
    opt.optimizer = c.optimizer;
    opt.tolerance = 1e-6;
    record("self_normalised", "optimizer", coherence_audit(batch, h.study.concentration, pairs, opt));
  }
  summary.write(o.out / "coherence.csv");
  detail.write(o.out / "coherence_violations.csv");

  if (sn.violations.size() > h.max_violations) {
    log << "coherence: " << sn.violations.size() << " violations of the self-normalised grid audit\n";
    return false;
  }
  return true;
}

bool run_two_level(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  const TwoLevelSpec& w = c.diagnose.two_level;
  const std::uint64_t seed = study_seed(c.run.seed, 4);
  const auto grid = resolve_grid(w.study, seed);
  const Gamble g = w.study.gamble.build();
  const TwoLevelBias shared =
      two_level_bias(grid, g, w.study.concentration, w.sample_size, true, w.replications, seed, o.threads);
  const TwoLevelBias indep =
      two_level_bias(grid, g, w.study.concentration, w.sample_size, false, w.replications, seed, o.threads);
  const double pooled = std::hypot(shared.standard_error, indep.standard_error);
  const double separation =
      pooled > 0.0 ? (std::abs(indep.mean_bias) - std::abs(shared.mean_bias)) / pooled : 0.0;

  CsvTable t(c.hash, c.run.seed, {"seeding", "n", "replications", "exact_value", "mean_bias", "standard_error", "separation"});
  for (const auto& [name, r] : {std::pair{"shared", shared}, std::pair{"independent", indep}}) {
    t.add_row({name, count(w.sample_size), count(r.replications), format_number(r.exact_value),
               format_number(r.mean_bias), format_number(r.standard_error), format_number(separation)});
  }
  t.write(o.out / "two_level.csv");
  if (separation < w.min_separation) {
    log << "two-level: separation " << separation << " pooled standard errors is below " << w.min_separation << '\n';
    return false;
  }
  return true;
}

bool run_consistency(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  const ConsistencySpec& s = c.diagnose.consistency;
  const std::uint64_t seed = study_seed(c.run.seed, 5);
  const auto grid = resolve_grid(s.study, seed);
  const ConsistencyTable table = finite_T_consistency(s.study.gamble.build(), s.study.concentration, grid,
                                                      {s.sizes, s.replications, seed, o.threads});
  CsvTable t(c.hash, c.run.seed, {"n", "mean_error", "mean_abs_error", "standard_error", "exact_value", "inversions"});
  for (const auto& r : table.rows) {
    t.add_row({count(r.sample_size), format_number(r.mean_error), format_number(r.mean_abs_error),
               format_number(r.standard_error), format_number(table.exact_value), count(table.inversions)});
  }
  t.write(o.out / "consistency.csv");
  if (table.inversions > s.max_inversions) {
    log << "consistency: " << table.inversions << " inversions exceed " << s.max_inversions << '\n';
    return false;
  }
  return true;
}

}  // namespace

int cmd_plain(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  if (c.run.plain_sizes.empty()) throw_domain_error("run.sizes: give sizes or N and n");
  const LowerPrevisionProblem problem = problem_of(c);
  const DirichletParams q = make_dirichlet(c.model.sampling_concentration, c.model.sampling_t);
  const std::size_t k = c.model.lower_bounds.size();

  std::vector<std::string> cols{"quantity"};
  for (std::size_t i = 0; i < c.run.plain_sizes.size(); ++i) cols.push_back("run_" + count(i + 1));

  Timings timings;
  std::vector<ConfidenceInterval> cis;
  for (const auto& [big_n, small_n] : c.run.plain_sizes) {
    const auto start = Clock::now();
    ReplicationPlan plan{c.run.seed, big_n, small_n, c.run.level, o.threads};
    cis.push_back(confidence_interval_fast(problem, q, plan, c.optimizer));
    timings.add("plain N=" + count(big_n) + " n=" + count(small_n), seconds_since(start));
    if (cis.back().empty) log << "plain: interval for N = " << big_n << ", n = " << small_n << " is empty\n";
  }

  CsvTable t(c.hash, c.run.seed, cols);
  auto emit = [&](const std::string& label, auto value) {
    std::vector<std::string> row{label};
    for (const auto& ci : cis) row.push_back(value(ci));
    t.add_row(std::move(row));
  };
  emit("N", [](const ConfidenceInterval& ci) { return count(ci.replications); });
  emit("n", [](const ConfidenceInterval& ci) { return count(ci.sample_size); });
  emit("lower_bound", [](const ConfidenceInterval& ci) { return format_number(ci.lo); });
  emit("upper_bound", [](const ConfidenceInterval& ci) { return format_number(ci.hi); });
  for (std::size_t j = 0; j < k; ++j) {
    emit("tau_bar_" + count(j + 1), [j](const ConfidenceInterval& ci) { return format_number(ci.mean_tau[j]); });
  }
  emit("ess_bar", [](const ConfidenceInterval& ci) { return format_number(ci.mean_ess); });
  emit("empty", [](const ConfidenceInterval& ci) { return flag(ci.empty); });
  if (c.run.beta > 0.0) {
    const double beta = c.run.beta;
    emit("lower_bound_biased",
         [beta](const ConfidenceInterval& ci) { return format_number(confidence_interval_biased(ci, beta).lo); });
    emit("upper_bound_biased",
         [beta](const ConfidenceInterval& ci) { return format_number(confidence_interval_biased(ci, beta).hi); });
  }
  t.write(o.out / "plain.csv");
  timings.write(c, o);
  return kSuccess;
}

int cmd_iterate(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  require_sizes(c.run);
  const LowerPrevisionProblem problem = problem_of(c);
  PipelineSettings ps;
  ps.initial_t = c.model.sampling_t;
  ps.iteration = {c.run.sample_size, c.run.ess_fraction, c.run.max_iter, c.run.seed, c.run.fresh_seeds};
  ps.stability = {c.run.stability_replications, c.run.sample_size, c.run.tau_tolerance, c.run.ess_fraction,
                  c.run.seed, o.threads};
  ps.plan = {c.run.seed, c.run.replications, c.run.sample_size, c.run.level, o.threads};
  ps.fast_mode = c.run.fast_mode;

  const auto start = Clock::now();
  PipelineResult result;
  try {
    result = run_full_pipeline(problem, ps, c.optimizer);
  } catch (const IterationError& e) {
    write_trace(c, o, e.trace());
    throw;
  }
  Timings timings;
  for (std::size_t i = 0; i < result.trace.records.size(); ++i) {
    timings.add("iteration " + count(i + 1), result.trace.records[i].wall_time);
  }
  timings.add("pipeline", seconds_since(start));
  write_trace(c, o, result.trace);

  CsvTable t(c.hash, c.run.seed, {"quantity", "value"});
  t.add_row({"terminated_by",
             result.trace.terminated_by == Termination::ess_saturation ? "ess_saturation" : "max_iterations"});
  t.add_row({"iterations", count(result.trace.records.size())});
  for (std::size_t j = 0; j < result.final_t.size(); ++j) {
    t.add_row({"final_t_" + count(j + 1), format_number(result.final_t[j])});
  }
  if (result.stability) {
    t.add_row({"stable", flag(result.stability->stable)});
    t.add_row({"max_tau_deviation", format_number(result.stability->max_tau_deviation)});
    t.add_row({"min_ess", format_number(result.stability->min_ess)});
  }
  t.add_row({"fell_back", flag(result.fell_back)});
  add_interval_rows(t, result.interval, c.run.beta);
  t.write(o.out / "interval.csv");
  timings.write(c, o);
  if (result.fell_back) log << "iterate: stability check failed, used the exact interval\n";
  return kSuccess;
}

int cmd_direct_ci(const ExperimentConfig& c, const CommandOptions& o, std::ostream& /*log*/) {
  require_sizes(c.run);
  const auto start = Clock::now();
  const ConfidenceInterval ci = direct_mean_ci(problem_of(c), c.model.sampling_t,
                                               c.run.replications * c.run.sample_size, c.run.level, c.run.seed);
  Timings timings;
  timings.add("direct", seconds_since(start));
  CsvTable t(c.hash, c.run.seed, {"quantity", "value"});
  add_interval_rows(t, ci, c.run.beta);
  t.write(o.out / "direct.csv");
  timings.write(c, o);
  return kSuccess;
}

int cmd_diagnose(const ExperimentConfig& c, const CommandOptions& o, std::ostream& log) {
  if (c.diagnose.selected.empty()) {
    throw_domain_error("diagnose.run: empty diagnostic list; choose from d1, bias, coherence, two-level, consistency");
  }
  Timings timings;
  bool ok = true;
  for (const auto& name : c.diagnose.selected) {
    const auto start = Clock::now();
    bool passed = true;
    if (name == "d1") {
      passed = run_d1(c, o, log);
    } else if (name == "bias") {
      passed = run_bias(c, o, log);
    } else if (name == "coherence") {
      passed = run_coherence(c, o, log);
    } else if (name == "two-level") {
      passed = run_two_level(c, o, log);
    } else if (name == "consistency") {
      passed = run_consistency(c, o, log);
    }
    timings.add(name, seconds_since(start));
    ok = ok && passed;
  }
  timings.write(c, o);
  return ok ? kSuccess : kDiagnosticViolation;
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& log) {
  try {
    ExperimentConfig config = load_config(options.config);
    if (options.seed) config.run.seed = *options.seed;
    std::filesystem::create_directories(options.out);
    if (name == "plain") return cmd_plain(config, options, log);
    if (name == "iterate") return cmd_iterate(config, options, log);
    if (name == "direct-ci") return cmd_direct_ci(config, options, log);
    if (name == "diagnose") return cmd_diagnose(config, options, log);
    log << "unknown command '" << name << "'\n";
    return kConfigError;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::domain ? kConfigError : kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace lowprev::cli
