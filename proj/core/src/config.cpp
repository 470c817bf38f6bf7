#include "accvr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "accvr/errors.hpp"
#include "accvr/experiment.hpp"
#include "accvr/schedules.hpp"

namespace accvr {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Collects every problem so one ConfigError can list them all.
struct Errors {
  std::vector<std::string> items;
  void add(std::string msg) { items.push_back(std::move(msg)); }
  void raise_if_any() const {
    if (items.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : items) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
};

std::optional<double> to_double(const std::string& v) {
  double out = 0.0;
  std::string_view sv = v;
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
  if (ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(out)) {
    return std::nullopt;
  }
  return out;
}

std::optional<std::uint64_t> to_uint(const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<bool> to_bool(const std::string& v) {
  const auto l = lower(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  return std::nullopt;
}

class Reader {
 public:
  Reader(const std::string& key, const std::string& value, Errors& errs)
      : key_(key), value_(value), errs_(errs) {}

  template <class T>
  void real(T& dst) {
    if (auto v = to_double(value_)) dst = *v;
    else bad("a number");
  }
  void real_opt(std::optional<double>& dst) {
    if (auto v = to_double(value_)) dst = *v;
    else bad("a number");
  }
  void count(std::size_t& dst) {
    if (auto v = to_uint(value_)) dst = static_cast<std::size_t>(*v);
    else bad("a non-negative integer");
  }
  void u64(std::uint64_t& dst) {
    if (auto v = to_uint(value_)) dst = *v;
    else bad("a non-negative integer");
  }
  void boolean(bool& dst) {
    if (auto v = to_bool(value_)) dst = *v;
    else bad("true or false");
  }
  void seeds(std::vector<std::uint64_t>& dst) {
    dst.clear();
    for (const auto& item : split_list(value_)) {
      if (auto v = to_uint(item)) dst.push_back(*v);
      else bad("a list of non-negative integers");
    }
  }
  void bad(const char* expected) {
    errs_.add(key_ + ": expected " + expected + ", got '" + value_ + "'");
  }

 private:
  const std::string& key_;
  const std::string& value_;
  Errors& errs_;
};

AlgorithmSpec implied_algorithm(const std::string& name) {
  AlgorithmSpec a;
  a.name = name;
  std::string base = lower(name);
  for (const std::string suffix : {"-accel", "_accel", "-acc"}) {
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      base.resize(base.size() - suffix.size());
      a.accelerated = true;
      try {
        a.kind = parse_estimator_kind(base);
      } catch (const ConfigError&) {
      }
      return a;
    }
  }
  a.accelerated = false;
  try {
    a.kind = parse_estimator_kind(base);
  } catch (const ConfigError&) {
  }
  return a;
}

}  // namespace

std::string_view to_string(Problem p) noexcept {
  switch (p) {
    case Problem::Ridge: return "ridge";
    case Problem::Lasso: return "lasso";
    case Problem::LogisticL1: return "logistic_l1";
  }
  return "?";
}

Problem parse_problem(std::string_view s) {
  const auto l = lower(std::string(s));
  if (l == "ridge") return Problem::Ridge;
  if (l == "lasso") return Problem::Lasso;
  if (l == "logistic_l1" || l == "logistic-l1") return Problem::LogisticL1;
  throw ConfigError("unknown problem '" + std::string(s) +
                    "' (expected ridge, lasso or logistic_l1)");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  Errors errs;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.add("line " + std::to_string(lineno) + ": unterminated section");
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.add("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      errs.add("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (!section.empty()) key = section + "." + key;
    out.emplace_back(std::move(key), std::move(value));
  }
  errs.raise_if_any();
  return out;
}

namespace {

void range_checks(const ExperimentConfig& cfg, Errors& errs) {
  if (cfg.algorithms.empty()) errs.add("algorithms: at least one algorithm is required");
  if (cfg.dataset.path.empty() && !cfg.dataset.synthetic) {
    errs.add("dataset: set dataset.path or dataset.synthetic.*");
  }
  if (!cfg.dataset.path.empty() && cfg.dataset.synthetic) {
    errs.add("dataset: dataset.path and dataset.synthetic.* are exclusive");
  }
  if (cfg.dataset.synthetic) {
    const auto& s = *cfg.dataset.synthetic;
    if (s.n < 1) errs.add("dataset.synthetic.n: must be >= 1");
    if (s.m < 1) errs.add("dataset.synthetic.m: must be >= 1");
    if (!(s.density > 0.0 && s.density <= 1.0)) {
      errs.add("dataset.synthetic.density: must lie in (0, 1]");
    }
  }
  if (cfg.lambda && *cfg.lambda < 0.0) errs.add("lambda: must be >= 0");
  if (!(cfg.budget_passes > 0.0)) errs.add("budget.passes: must be > 0");
  if (cfg.T && *cfg.T == 0) errs.add("budget.T: must be > 0");
  if (cfg.seeds.empty()) errs.add("seeds: need at least one seed");
  if (!(cfg.bucket_passes > 0.0)) errs.add("aggregate.bucket_passes: must be > 0");
  if (!(cfg.reference_tol > 0.0)) errs.add("reference.tol: must be > 0");
  if (cfg.tuning.t_max < 1) errs.add("tuning.t_max: must be >= 1");
  if (cfg.tuning.s_max < 1) errs.add("tuning.s_max: must be >= 1");
  if (cfg.tuning.seeds.empty()) errs.add("tuning.seeds: need at least one seed");
  if (cfg.tuning.budget_passes && !(*cfg.tuning.budget_passes > 0.0)) {
    errs.add("tuning.budget_passes: must be > 0");
  }
  std::set<std::string> names;
  for (const auto& a : cfg.algorithms) {
    const std::string k = "algo." + a.name;
    if (!names.insert(a.name).second) errs.add(k + ": listed twice");
    if (a.b < 1) errs.add(k + ".b: must be >= 1");
    if (a.p && *a.p < 1.0) errs.add(k + ".p: must be >= 1");
    if (!(a.step_scale > 0.0)) errs.add(k + ".step_scale: must be > 0");
    if (a.tau0 && !(*a.tau0 > 0.0 && *a.tau0 <= 1.0)) {
      errs.add(k + ".tau0: must lie in (0, 1]");
    }
    if (a.gamma && !(*a.gamma > 0.0)) errs.add(k + ".gamma: must be > 0");
    if (a.tau && !(*a.tau > 0.0 && *a.tau <= 1.0)) {
      errs.add(k + ".tau: must lie in (0, 1]");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  const auto kvs = parse_key_values(text);
  ExperimentConfig cfg;
  Errors errs;
  std::vector<std::string> algo_names;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> algo_keys;
  std::set<std::string> seen;
  SyntheticSpec syn;
  bool have_synthetic = false;

  for (const auto& [key, value] : kvs) {
    if (!seen.insert(key).second) {
      errs.add(key + ": duplicate key");
      continue;
    }
    Reader r(key, value, errs);
    if (key == "problem") {
      try {
        cfg.problem = parse_problem(value);
      } catch (const ConfigError& e) {
        errs.add(key + ": " + e.what());
      }
    } else if (key == "lambda") {
      if (lower(value) != "default") r.real_opt(cfg.lambda);
    } else if (key == "dataset.path") {
      cfg.dataset.path = value;
    } else if (key == "dataset.rescale") {
      r.boolean(cfg.dataset.rescale);
    } else if (key == "dataset.dim") {
      r.count(cfg.dataset.dim);
    } else if (key.rfind("dataset.synthetic.", 0) == 0) {
      have_synthetic = true;
      const std::string field = key.substr(std::string("dataset.synthetic.").size());
      if (field == "n") r.count(syn.n);
      else if (field == "m") r.count(syn.m);
      else if (field == "seed") r.u64(syn.seed);
      else if (field == "noise") r.real(syn.noise);
      else if (field == "density") r.real(syn.density);
      else if (field == "latent_rank") r.count(syn.latent_rank);
      else if (field == "latent_noise") r.real(syn.latent_noise);
      else if (field == "truth_scale") r.real(syn.truth_scale);
      else errs.add(key + ": unknown key");
    } else if (key == "budget.passes") {
      r.real(cfg.budget_passes);
    } else if (key == "budget.T") {
      std::size_t t = 0;
      r.count(t);
      cfg.T = t;
    } else if (key == "seeds") {
      r.seeds(cfg.seeds);
    } else if (key == "trace_every") {
      r.count(cfg.trace_every);
    } else if (key == "output") {
      cfg.output_dir = value;
    } else if (key == "record_wall_ms") {
      r.boolean(cfg.record_wall_ms);
    } else if (key == "aggregate.bucket_passes") {
      r.real(cfg.bucket_passes);
    } else if (key == "reference.tol") {
      r.real(cfg.reference_tol);
    } else if (key == "reference.max_iter") {
      r.count(cfg.reference_max_iter);
    } else if (key == "tuning.t_max") {
      r.count(cfg.tuning.t_max);
    } else if (key == "tuning.s_max") {
      r.count(cfg.tuning.s_max);
    } else if (key == "tuning.grid") {
      const auto l = lower(value);
      if (l == "linear") cfg.tuning.grid = TuneGrid::Linear;
      else if (l == "pow2") cfg.tuning.grid = TuneGrid::Pow2;
      else r.bad("linear or pow2");
    } else if (key == "tuning.criterion") {
      const auto l = lower(value);
      if (l == "final") cfg.tuning.criterion = TuneCriterion::FinalSubopt;
      else if (l == "target") cfg.tuning.criterion = TuneCriterion::PassesToTarget;
      else r.bad("final or target");
    } else if (key == "tuning.target") {
      r.real(cfg.tuning.target);
    } else if (key == "tuning.budget_passes") {
      r.real_opt(cfg.tuning.budget_passes);
    } else if (key == "tuning.seeds") {
      r.seeds(cfg.tuning.seeds);
    } else if (key == "algorithms") {
      algo_names = split_list(value);
    } else if (key.rfind("algo.", 0) == 0) {
      const auto rest = key.substr(5);
      const auto dot = rest.rfind('.');
      if (dot == std::string::npos || dot == 0) {
        errs.add(key + ": expected algo.<name>.<field>");
      } else {
        algo_keys[rest.substr(0, dot)].emplace_back(rest.substr(dot + 1), value);
      }
    } else {
      errs.add(key + ": unknown key");
    }
  }

  if (have_synthetic) cfg.dataset.synthetic = syn;

  for (const auto& name : algo_names) {
    AlgorithmSpec a = implied_algorithm(name);
    auto it = algo_keys.find(name);
    if (it != algo_keys.end()) {
      for (const auto& [field, value] : it->second) {
        const std::string key = "algo." + name + "." + field;
        Reader r(key, value, errs);
        if (field == "kind") {
          try {
            a.kind = parse_estimator_kind(value);
          } catch (const ConfigError& e) {
            errs.add(key + ": " + e.what());
          }
        } else if (field == "accelerated") r.boolean(a.accelerated);
        else if (field == "b") r.count(a.b);
        else if (field == "p") r.real_opt(a.p);
        else if (field == "step_scale") r.real(a.step_scale);
        else if (field == "tau0") r.real_opt(a.tau0);
        else if (field == "gamma") r.real_opt(a.gamma);
        else if (field == "tau") r.real_opt(a.tau);
        else if (field == "epoch_deterministic") r.boolean(a.epoch_deterministic);
        else if (field == "epoch_length") r.count(a.epoch_length);
        else errs.add(key + ": unknown key");
      }
      algo_keys.erase(it);
    }
    cfg.algorithms.push_back(std::move(a));
  }
  for (const auto& [name, _] : algo_keys) {
    errs.add("algo." + name + ": not listed in `algorithms`");
  }
  range_checks(cfg, errs);
  errs.raise_if_any();
  return cfg;
}

void ExperimentConfig::validate() const {
  Errors errs;
  range_checks(*this, errs);
  errs.raise_if_any();
}

const AlgorithmSpec& ExperimentConfig::algorithm(std::string_view name) const {
  for (const auto& a : algorithms) {
    if (a.name == name) return a;
  }
  throw ConfigError("no algorithm named '" + std::string(name) + "'");
}

ExperimentConfig apply_defaults(ExperimentConfig cfg) {
  const auto data = load_dataset(cfg.dataset);
  const std::size_t n = data.n();
  if (!cfg.lambda) cfg.lambda = default_lambda(cfg.problem, n);

  Errors errs;
  for (auto& a : cfg.algorithms) {
    if (a.b > n) {
      errs.add("algo." + a.name + ".b: exceeds n=" + std::to_string(n));
      continue;
    }
    if (!a.p) a.p = 2.0 * static_cast<double>(n);
  }
  errs.raise_if_any();

  const auto obj = make_objective(cfg, std::make_shared<SparseDataset>(data));
  for (const auto& a : cfg.algorithms) {
    if (!a.accelerated) continue;
    const Schedule s = schedule_for(a, obj);
    const auto report =
        validate_schedule(s, mseb_params(a.kind, n, a.b, *a.p));
    if (!report.pass()) {
      cfg.warnings.push_back("algo." + a.name +
                             ": schedule check failed: " +
                             report.summary());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_defaults(parse_config(ss.str()));
}

}  // namespace accvr
