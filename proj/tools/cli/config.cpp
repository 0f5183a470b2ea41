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

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <lowprev/error.hpp>
#include <lowprev/rng.hpp>
#include <lowprev/sampling.hpp>

namespace lowprev::cli {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw_domain_error(path + ": " + what);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::string spaced = s;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

double to_double(const std::string& path, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) field_error(path, "expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& path, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) field_error(path, "expected a nonnegative integer, got '" + text + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& path, const std::string& text) {
  std::vector<double> out;
  for (const auto& t : tokens(text)) out.push_back(to_double(path, t));
  if (out.empty()) field_error(path, "expected a list of numbers");
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& path, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& t : tokens(text)) {
    const auto v = to_unsigned(path, t);
    if (v == 0) field_error(path, "sizes must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) field_error(path, "expected a list of sizes");
  return out;
}

bool to_bool(const std::string& path, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  field_error(path, "expected true or false, got '" + text + "'");
}

// Reads sections of an INI tree and remembers which keys were used, so unknown keys can be reported.
class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) field_error(section, "keys must live inside a [section]");
      for (const auto& [key, value] : body) unused_.insert(section + "." + key);
    }
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) {
    const auto sec = tree_.get_child_optional(ptree::path_type(section, '\0'));
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!value) return std::nullopt;
    unused_.erase(section + "." + key);
    return trim(*value);
  }

  void finish() const {
    if (!unused_.empty()) field_error(*unused_.begin(), "unknown key");
  }

 private:
  const ptree& tree_;
  std::set<std::string> unused_;
};

template <class T, class Parse>
T value_or(Reader& r, const std::string& section, const std::string& key, T fallback, Parse parse) {
  const auto raw = r.get(section, key);
  if (!raw) return fallback;
  return parse(section + "." + key, *raw);
}

double positive(const std::string& path, double v) {
  if (!(v > 0.0)) field_error(path, "must be positive");
  return v;
}

std::vector<double> parse_bounds(const std::string& path, const std::string& text, std::optional<std::size_t> k) {
  std::vector<double> lb = to_doubles(path, text);
  if (lb.size() == 1) {
    if (!k) field_error(path, "a scalar bound needs model.k");
    lb.assign(*k, lb.front());
  } else if (k && lb.size() != *k) {
    field_error(path, "has " + std::to_string(lb.size()) + " entries but model.k is " + std::to_string(*k));
  }
  try {
    ConstrainedSimplex check(lb);
  } catch (const Error& e) {
    field_error(path, e.what());
  }
  return lb;
}

SimplexPoint parse_sampling(const std::string& path, const std::string& text, const std::vector<double>& lb) {
  const std::size_t k = lb.size();
  if (text == "barycenter") return ConstrainedSimplex(lb).barycenter();
  if (text == "uniform") return SimplexPoint(k, 1.0 / static_cast<double>(k));
  const std::vector<double> t = to_doubles(path, text);
  if (t.size() != k) field_error(path, "expected " + std::to_string(k) + " entries");
  try {
    return checked_simplex_point(t);
  } catch (const Error& e) {
    field_error(path, e.what());
  }
}

GambleSpec parse_gamble(Reader& r, const std::string& section, const GambleSpec& fallback, std::size_t k) {
  GambleSpec g = fallback;
  if (auto kind = r.get(section, "kind")) {
    g.kind = *kind;
    g.coefficients.clear();
  }
  if (auto c = r.get(section, "coefficients")) g.coefficients = to_doubles(section + ".coefficients", *c);
  if (g.kind == "linear") {
    if (g.coefficients.size() != k) {
      field_error(section + ".coefficients", "expected " + std::to_string(k) + " coefficients");
    }
  } else if (g.kind == "entropy") {
    if (!g.coefficients.empty()) field_error(section + ".coefficients", "the entropy gamble takes no coefficients");
  } else {
    field_error(section + ".kind", "expected linear or entropy, got '" + g.kind + "'");
  }
  return g;
}

void check_dirichlet(const std::string& path, double s, const SimplexPoint& t) {
  try {
    make_dirichlet(s, t);
  } catch (const Error& e) {
    field_error(path, e.what());
  }
}

std::vector<SimplexPoint> parse_points(const std::string& path, const std::string& text, const ConstrainedSimplex& T) {
  std::vector<SimplexPoint> grid;
  std::istringstream in(text);
  for (std::string row; std::getline(in, row, ';');) {
    if (trim(row).empty()) continue;
    std::vector<double> t = to_doubles(path, row);
    if (t.size() != T.dimension() || !T.contains(t)) field_error(path, "grid point '" + trim(row) + "' is not in the parameter set");
    grid.push_back(std::move(t));
  }
  if (grid.empty()) field_error(path, "empty grid");
  return grid;
}

void check_grid_spec(const std::string& path, const StudySpec& study) {
  const std::string& g = study.grid;
  if (g == "vertices") return;
  if (g.rfind("random:", 0) == 0) {
    if (to_unsigned(path, g.substr(7)) == 0) field_error(path, "random grid needs at least one point");
    return;
  }
  parse_points(path, g, study.feasible());
}

StudySpec parse_study(Reader& r, const std::string& section, const ExperimentConfig& base, const std::string& grid) {
  StudySpec st;
  st.concentration = value_or(r, section, "s", base.model.concentration,
                              [](const std::string& p, const std::string& v) { return positive(p, to_double(p, v)); });
  st.lower_bounds = base.model.lower_bounds;
  const bool own_bounds = static_cast<bool>(r.get(section, "lb").has_value());
  if (own_bounds) {
    const auto k = r.get(section, "k");
    std::optional<std::size_t> dim;
    if (k) dim = static_cast<std::size_t>(to_unsigned(section + ".k", *k));
    st.lower_bounds = parse_bounds(section + ".lb", *r.get(section, "lb"), dim);
  }
  const std::size_t k = st.lower_bounds.size();
  const GambleSpec fallback = own_bounds && base.gamble.coefficients.size() != k ? GambleSpec{} : base.gamble;
  st.gamble = parse_gamble(r, section, fallback, k);

  const bool own_sampling = r.get(section, "sampling_t").has_value();
  st.sampling_t = own_sampling ? parse_sampling(section + ".sampling_t", *r.get(section, "sampling_t"), st.lower_bounds)
                  : own_bounds ? ConstrainedSimplex(st.lower_bounds).barycenter()
                               : base.model.sampling_t;
  st.sampling_concentration =
      value_or(r, section, "sampling_s", own_bounds || own_sampling ? st.concentration : base.model.sampling_concentration,
               [](const std::string& p, const std::string& v) { return positive(p, to_double(p, v)); });
  check_dirichlet(section + ".sampling_t", st.sampling_concentration, st.sampling_t);
  st.grid = r.get(section, "grid").value_or(grid);
  check_grid_spec(section + ".grid", st);
  return st;
}

const auto kSizes = [](const std::string& p, const std::string& v) { return to_sizes(p, v); };
const auto kCount = [](const std::string& p, const std::string& v) { return static_cast<std::size_t>(to_unsigned(p, v)); };
const auto kReal = [](const std::string& p, const std::string& v) { return to_double(p, v); };
const auto kFlag = [](const std::string& p, const std::string& v) { return to_bool(p, v); };

std::vector<std::pair<std::size_t, std::size_t>> parse_plain_sizes(const std::string& path, const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& t : tokens(text)) {
    const auto colon = t.find(':');
    const std::uint64_t big_n = to_unsigned(path, t.substr(0, colon));
    const std::uint64_t small_n = colon == std::string::npos ? big_n : to_unsigned(path, t.substr(colon + 1));
    if (big_n < 2 || small_n < 2) field_error(path, "N and n must be at least 2");
    out.emplace_back(static_cast<std::size_t>(big_n), static_cast<std::size_t>(small_n));
  }
  if (out.empty()) field_error(path, "expected a list of N or N:n entries");
  return out;
}

}  // namespace

Gamble GambleSpec::build() const {
  if (kind == "entropy") return Gamble::entropy();
  return Gamble::linear(coefficients);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<SimplexPoint> resolve_grid(const StudySpec& study, std::uint64_t seed) {
  const ConstrainedSimplex T = study.feasible();
  const std::size_t k = T.dimension();
  if (study.grid == "vertices") {
    std::vector<SimplexPoint> grid;
    for (std::size_t j = 0; j < k; ++j) grid.push_back(T.vertex(j));
    return grid;
  }
  if (study.grid.rfind("random:", 0) == 0) {
    const auto m = static_cast<std::size_t>(to_unsigned("grid", study.grid.substr(7)));
    const DirichletParams flat = make_dirichlet(static_cast<double>(k), SimplexPoint(k, 1.0 / static_cast<double>(k)));
    const SampleBatch draws = sample_dirichlet(flat, m, derive_seed(seed, 0, Stream::diagnostic(0xfffff)));
    std::vector<SimplexPoint> grid;
    const auto lb = T.lower_bounds();
    for (std::size_t i = 0; i < m; ++i) {
      SimplexPoint t(k);
      for (std::size_t j = 0; j < k; ++j) t[j] = lb[j] + T.slack() * draws.point(i)[j];
      grid.push_back(std::move(t));
    }
    return grid;
  }
  return parse_points("grid", study.grid, T);
}

ExperimentConfig parse_config(const std::string& text) {
  ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw_domain_error(std::string("config: ") + e.what());
  }
  Reader r(tree);
  ExperimentConfig cfg;
  cfg.hash = fnv1a_hex(text);

  // [model]
  std::optional<std::size_t> k;
  if (auto raw = r.get("model", "k")) {
    k = static_cast<std::size_t>(to_unsigned("model.k", *raw));
    if (*k < 2) field_error("model.k", "must be at least 2");
  }
  const auto s = r.get("model", "s");
  if (!s) field_error("model.s", "missing");
  cfg.model.concentration = positive("model.s", to_double("model.s", *s));
  const auto lb = r.get("model", "lb");
  if (!lb) field_error("model.lb", "missing");
  cfg.model.lower_bounds = parse_bounds("model.lb", *lb, k);
  cfg.model.sampling_t = parse_sampling("model.sampling_t", r.get("model", "sampling_t").value_or("barycenter"),
                                        cfg.model.lower_bounds);
  cfg.model.sampling_concentration =
      value_or(r, "model", "sampling_s", cfg.model.concentration,
               [](const std::string& p, const std::string& v) { return positive(p, to_double(p, v)); });
  check_dirichlet("model.sampling_t", cfg.model.sampling_concentration, cfg.model.sampling_t);

  // [gamble]
  cfg.gamble = parse_gamble(r, "gamble", GambleSpec{"", {}}, cfg.model.lower_bounds.size());

  // [run]
  RunSpec& run = cfg.run;
  run.seed = value_or(r, "run", "seed", std::uint64_t{0}, to_unsigned);
  run.level = value_or(r, "run", "level", 0.95, kReal);
  if (!(run.level > 0.0 && run.level < 1.0)) field_error("run.level", "must lie in (0, 1)");
  run.replications = value_or(r, "run", "N", std::size_t{0}, kCount);
  run.sample_size = value_or(r, "run", "n", std::size_t{0}, kCount);
  if (auto sizes = r.get("run", "sizes")) {
    run.plain_sizes = parse_plain_sizes("run.sizes", *sizes);
  } else if (run.replications > 0 || run.sample_size > 0) {
    run.plain_sizes = {{run.replications, run.sample_size}};
  }
  const std::string mode = r.get("run", "mode").value_or("exact");
  if (mode != "exact" && mode != "fast") field_error("run.mode", "expected exact or fast, got '" + mode + "'");
  run.fast_mode = mode == "fast";
  run.ess_fraction = value_or(r, "run", "ess_fraction", 0.95, kReal);
  if (!(run.ess_fraction > 0.0 && run.ess_fraction <= 1.0)) field_error("run.ess_fraction", "must lie in (0, 1]");
  run.max_iter = value_or(r, "run", "max_iter", std::size_t{10}, kCount);
  if (run.max_iter == 0) field_error("run.max_iter", "no iterations permitted");
  run.fresh_seeds = value_or(r, "run", "fresh_seeds", false, kFlag);
  run.stability_replications = value_or(r, "run", "stability_replications", std::size_t{8}, kCount);
  if (run.stability_replications == 0) field_error("run.stability_replications", "must be positive");
  run.tau_tolerance = value_or(r, "run", "tau_tolerance", 0.02, kReal);
  if (!(run.tau_tolerance >= 0.0)) field_error("run.tau_tolerance", "must be nonnegative");
  run.beta = value_or(r, "run", "beta", 0.0, kReal);
  if (!(run.beta >= 0.0)) field_error("run.beta", "must be nonnegative");

  // [optimizer]
  OptimizerConfig& opt = cfg.optimizer;
  opt.max_evals = value_or(r, "optimizer", "max_evals", opt.max_evals, kCount);
  opt.xtol = value_or(r, "optimizer", "xtol", opt.xtol, kReal);
  opt.ftol = value_or(r, "optimizer", "ftol", opt.ftol, kReal);
  opt.restarts = value_or(r, "optimizer", "restarts", opt.restarts, kCount);
  const std::string start = r.get("optimizer", "start").value_or("barycenter");
  if (start == "barycenter") {
    opt.start = StartKind::barycenter;
  } else if (start == "lb_corner") {
    opt.start = StartKind::lb_corner;
  } else {
    field_error("optimizer.start", "expected barycenter or lb_corner, got '" + start + "'");
  }
  try {
    opt.validate();
  } catch (const Error& e) {
    field_error("optimizer", e.what());
  }

  // [diagnose] and one section per diagnostic
  if (auto list = r.get("diagnose", "run")) {
    const auto& valid = diagnostic_names();
    for (const auto& name : tokens(*list)) {
      if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
        field_error("diagnose.run", "unknown diagnostic '" + name + "'; valid names are d1, bias, coherence, two-level, consistency");
      }
      cfg.diagnose.selected.push_back(name);
    }
  }
  DiagnoseSpec& dg = cfg.diagnose;

  dg.d1.study = parse_study(r, "d1", cfg, "vertices");
  dg.d1.sizes = value_or(r, "d1", "sizes", dg.d1.sizes, kSizes);
  dg.d1.replications = value_or(r, "d1", "replications", dg.d1.replications, kCount);
  dg.d1.independent = value_or(r, "d1", "independent", dg.d1.independent, kFlag);
  dg.d1.max_deviation = value_or(r, "d1", "max_deviation", dg.d1.max_deviation, kReal);
  if (dg.d1.replications < 30) field_error("d1.replications", "must be at least 30");
  if (std::find(dg.d1.sizes.begin(), dg.d1.sizes.end(), 1U) == dg.d1.sizes.end()) {
    field_error("d1.sizes", "must include n = 1");
  }

  dg.bias.study = parse_study(r, "bias", cfg, "vertices");
  dg.bias.sizes = value_or(r, "bias", "sizes", dg.bias.sizes, kSizes);
  dg.bias.replications = value_or(r, "bias", "replications", dg.bias.replications, kCount);
  dg.bias.slope_min = value_or(r, "bias", "slope_min", dg.bias.slope_min, kReal);
  dg.bias.slope_max = value_or(r, "bias", "slope_max", dg.bias.slope_max, kReal);
  if (dg.bias.replications < 2) field_error("bias.replications", "must be at least 2");

  dg.coherence.study = parse_study(r, "coherence", cfg, "random:20");
  dg.coherence.pairs = value_or(r, "coherence", "pairs", dg.coherence.pairs, kCount);
  dg.coherence.sample_size = value_or(r, "coherence", "n", dg.coherence.sample_size, kCount);
  dg.coherence.tolerance = value_or(r, "coherence", "tolerance", dg.coherence.tolerance, kReal);
  dg.coherence.scale = value_or(r, "coherence", "scale", dg.coherence.scale, kReal);
  dg.coherence.shift = value_or(r, "coherence", "shift", dg.coherence.shift, kReal);
  dg.coherence.optimizer_audit = value_or(r, "coherence", "optimizer_audit", dg.coherence.optimizer_audit, kFlag);
  dg.coherence.max_violations = value_or(r, "coherence", "max_violations", dg.coherence.max_violations, kCount);
  if (dg.coherence.sample_size < 2) field_error("coherence.n", "must be at least 2");
  if (!(dg.coherence.scale > 0.0)) field_error("coherence.scale", "must be positive");

  dg.two_level.study = parse_study(r, "two-level", cfg, "vertices");
  dg.two_level.sample_size = value_or(r, "two-level", "n", dg.two_level.sample_size, kCount);
  dg.two_level.replications = value_or(r, "two-level", "replications", dg.two_level.replications, kCount);
  dg.two_level.min_separation = value_or(r, "two-level", "min_separation", dg.two_level.min_separation, kReal);
  if (dg.two_level.sample_size == 0) field_error("two-level.n", "must be positive");
  if (dg.two_level.replications < 2) field_error("two-level.replications", "must be at least 2");

  dg.consistency.study = parse_study(r, "consistency", cfg, "vertices");
  dg.consistency.sizes = value_or(r, "consistency", "sizes", dg.consistency.sizes, kSizes);
  dg.consistency.replications = value_or(r, "consistency", "replications", dg.consistency.replications, kCount);
  dg.consistency.max_inversions = value_or(r, "consistency", "max_inversions", dg.consistency.max_inversions, kCount);
  if (dg.consistency.replications < 2) field_error("consistency.replications", "must be at least 2");

  r.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_domain_error("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lowprev::cli
