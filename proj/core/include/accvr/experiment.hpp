#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "accvr/config.hpp"
#include "accvr/solver.hpp"

namespace accvr {

/// 1/n for ridge, 1/sqrt(n) for lasso and logistic_l1.
double default_lambda(Problem problem, std::size_t n);

/// Reads or synthesizes the dataset, applies dataset.dim, then rescales
/// features when dataset.rescale is set.
SparseDataset load_dataset(const DatasetSource& src);

/// Ridge: squared loss + L2; lasso: squared loss + L1; logistic_l1:
/// logistic loss + L1 with labels mapped to {-1, +1} by sign (y > 0 is +1).
/// Uses cfg.lambda, or the default rule when unset.
CompositeObjective make_objective(const ExperimentConfig& cfg,
                                  std::shared_ptr<const SparseDataset> data);

/// evals / n.
double effective_passes(EstimatorKind kind, std::size_t n, std::size_t b,
                        double p, std::size_t evals);

/// Expected component evaluations per iteration divided by n, excluding the
/// n spent at initialization: Full 1, SAGA b/n, SARGE 2b/n, SVRG/SARAH
/// 1/p + (1 - 1/p) 2b/n.
double expected_passes_per_iteration(EstimatorKind kind, std::size_t n,
                                     std::size_t b, double p);

/// Accelerated schedule for an algorithm entry. Strongly convex problems use
/// (gamma, tau) when both are set, the preset otherwise. Non-strongly-convex
/// problems use the preset, rescaled when step_scale != 1 or tau0 is set.
Schedule schedule_for(const AlgorithmSpec& algo, const CompositeObjective& obj);

/// Non-accelerated step: algo.gamma, or 1/(3L).
double nonaccel_gamma(const AlgorithmSpec& algo, const CompositeObjective& obj);

/// Runs one (algorithm, seed) pair from x0 = 0. `opts.T` of 0 is replaced by
/// the largest iteration count the pass budget could allow, and max_evals is
/// set from budget_passes.
RunResult run_algorithm(const CompositeObjective& obj, const AlgorithmSpec& algo,
                        double budget_passes, RunOptions opts);

struct AggregateRow {
  double eff_passes = 0.0;
  double median_subopt = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t n_seeds = 0;
};

/// Linear-interpolation quantile (q in [0, 1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// Buckets at 0, w, 2w, ... up to the largest final eff_passes. Each run
/// contributes its last traced row with eff_passes <= edge.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs,
                                         double bucket_width);

inline constexpr const char* kTraceHeader = "k,eff_passes,F,subopt,dist_sq,wall_ms,seed";
inline constexpr const char* kAggregateHeader =
    "eff_passes,median_subopt,q25,q75,n_seeds";

/// Floats are written with %.17g; wall_ms is written as 0 when
/// `record_wall_ms` is false so reruns are byte-identical.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     bool record_wall_ms = true);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// ACCVR_MAX_PARALLEL when set (>= 1), else hardware concurrency.
std::size_t max_parallel_runs();

/// Calls fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

struct ExperimentOutput {
  std::vector<std::string> run_files;
  std::vector<std::string> aggregate_files;
  Reference reference;
};

/// Computes x* once, runs every (algorithm, seed) pair and writes
/// `<output>/<algo>_seed<seed>.csv` and `<output>/<algo>_aggregate.csv`.
/// Throws ConfigError when the reference solver does not converge.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// x* via run_reference with the configured tolerance; throws on failure.
Reference compute_reference(const CompositeObjective& obj, double tol,
                            std::size_t max_iter);

struct TuneCandidate {
  AlgorithmSpec algo;
  double score = 0.0;         // the criterion value (lower is better)
  double median_final = 0.0;  // median final subopt
};

struct TuneResult {
  AlgorithmSpec best;
  std::vector<TuneCandidate> evaluated;
};

/// Grid values t: 1..max (linear) or 1, 2, 4, ... <= max (pow2).
std::vector<std::size_t> grid_values(TuneGrid grid, std::size_t max);

/// Candidate parameterizations of `algo`:
///   non-accelerated: gamma = 1/t
///   accelerated, strongly convex: (gamma, tau) = (1/t, 1/t')
///   accelerated, otherwise: step_scale = s with tau0 = 1/2
std::vector<AlgorithmSpec> tuning_candidates(const AlgorithmSpec& algo,
                                             const CompositeObjective& obj,
                                             const TuningSpec& spec);

/// First traced eff_passes with subopt <= target; +inf if never reached.
double passes_to_target(const RunResult& run, double target);

/// Scores every candidate over spec.seeds and returns the argmin (ties keep
/// the earlier candidate). Final: median final subopt. Target: median passes
/// to the target, +inf unless every seed reaches it; ties go to the lower
/// median final subopt.
TuneResult tune_over(const CompositeObjective& obj, const Reference& ref,
                     const std::vector<AlgorithmSpec>& candidates,
                     const TuningSpec& spec, double budget_passes,
                     std::size_t trace_every = 0);

/// Tunes the named algorithm of a config (defaults must be applied).
TuneResult tune(const ExperimentConfig& cfg, const AlgorithmSpec& algo,
                double budget_passes);

}  // namespace accvr
