#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "accvr/data.hpp"
#include "accvr/estimators.hpp"

namespace accvr {

// Experiment configuration file
// -----------------------------
// One `key = value` per line; `#` starts a comment. Keys are dotted paths;
// a `[section]` line prefixes the keys that follow it with `section.`.
// Lists are comma separated. Unknown keys are an error.
//
//   problem            ridge | lasso | logistic_l1
//   lambda             number, or `default` (1/n ridge, 1/sqrt(n) otherwise)
//   dataset.path       LIBSVM file (exclusive with dataset.synthetic.*)
//   dataset.synthetic.{n,m,seed,noise,density,latent_rank,latent_noise}
//   dataset.rescale    true | false (default true)
//   dataset.dim        override feature dimension upward (0 = as read)
//   budget.passes      effective-pass budget per run
//   budget.T           iteration cap per run (optional)
//   seeds              list of integer seeds (default 1)
//   trace_every        iterations between trace rows (0 = ceil(n/b))
//   output             output directory (default `out`)
//   record_wall_ms     true | false (default true)
//   aggregate.bucket_passes   bucket width for aggregate CSVs (default 1)
//   reference.{tol,max_iter}
//   tuning.{t_max,s_max,grid,criterion,target,budget_passes,seeds}
//   algorithms         list of names; `<kind>` or `<kind>-accel` imply the
//                      kind and whether momentum is used
//   algo.<name>.{kind,accelerated,b,p,step_scale,tau0,gamma,tau,
//                epoch_deterministic,epoch_length}

enum class Problem { Ridge, Lasso, LogisticL1 };

std::string_view to_string(Problem p) noexcept;
Problem parse_problem(std::string_view s);

struct DatasetSource {
  std::string path;
  std::optional<SyntheticSpec> synthetic;
  bool rescale = true;
  std::size_t dim = 0;
};

struct AlgorithmSpec {
  std::string name;
  EstimatorKind kind = EstimatorKind::Saga;
  bool accelerated = true;
  std::size_t b = 1;
  std::optional<double> p;  // default 2n
  // Accelerated, non-strongly convex: gamma_k *= step_scale, tau_0 = tau0.
  double step_scale = 1.0;
  std::optional<double> tau0;
  // Accelerated, strongly convex: constant (gamma, tau) override.
  // Non-accelerated: gamma is the step size (default 1/(3L)).
  std::optional<double> gamma;
  std::optional<double> tau;
  bool epoch_deterministic = true;
  std::size_t epoch_length = 0;  // 0 = 2n
};

enum class TuneGrid { Linear, Pow2 };
enum class TuneCriterion { FinalSubopt, PassesToTarget };

struct TuningSpec {
  std::size_t t_max = 32;
  std::size_t s_max = 32;
  TuneGrid grid = TuneGrid::Linear;
  TuneCriterion criterion = TuneCriterion::FinalSubopt;
  double target = 1e-6;
  std::optional<double> budget_passes;
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct ExperimentConfig {
  DatasetSource dataset;
  Problem problem = Problem::Ridge;
  std::optional<double> lambda;  // nullopt = default rule
  std::vector<AlgorithmSpec> algorithms;
  double budget_passes = 50.0;
  std::optional<std::size_t> T;
  std::vector<std::uint64_t> seeds{1};
  std::size_t trace_every = 0;
  std::string output_dir = "out";
  bool record_wall_ms = true;
  double bucket_passes = 1.0;
  double reference_tol = 1e-12;
  std::size_t reference_max_iter = 1'000'000;
  TuningSpec tuning;
  /// Non-fatal findings from apply_defaults (e.g. schedules failing the
  /// non-positivity checks after user overrides).
  std::vector<std::string> warnings;

  /// Throws ConfigError listing every invalid field.
  void validate() const;
  const AlgorithmSpec& algorithm(std::string_view name) const;
};

/// Parsed `key -> value` pairs after section expansion, in file order.
std::vector<std::pair<std::string, std::string>> parse_key_values(
    std::string_view text);

/// Syntax and range checks only; no dataset access.
ExperimentConfig parse_config(std::string_view text);

/// Loads the dataset to learn n, then fills lambda (1/n ridge, 1/sqrt(n)
/// lasso/logistic), p = 2n for SVRG/SARAH, and records validate_schedule
/// warnings for every accelerated algorithm.
ExperimentConfig apply_defaults(ExperimentConfig cfg);

/// parse_config + apply_defaults on a file.
ExperimentConfig load_config(const std::string& path);

}  // namespace accvr
