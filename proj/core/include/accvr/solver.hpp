#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "accvr/estimators.hpp"
#include "accvr/objective.hpp"
#include "accvr/schedules.hpp"

namespace accvr {

/// High-accuracy minimizer and its objective value.
struct Reference {
  DenseVector x_star;
  double F_star = 0.0;
};

/// One recorded point of a run. Accelerated runs report F on y_k and the
/// distance on z_k; non-accelerated runs report both on x_k.
struct TraceRow {
  std::size_t k = 0;
  std::size_t eval_count = 0;
  double eff_passes = 0.0;  // eval_count / n
  double F = 0.0;
  double subopt = 0.0;   // F - F(x*), NaN without a reference
  double dist_sq = 0.0;  // ||z_k - x*||^2, NaN without a reference
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

struct RunResult {
  std::vector<TraceRow> trace;
  DenseVector final_y;
  DenseVector final_z;
  std::size_t eval_count = 0;
  std::uint64_t seed = 0;
};

struct SolverState {
  DenseVector x, y, z;
  std::size_t k = 0;
  std::size_t eval_count = 0;

  /// z_0 = y_0 = x_0.
  static SolverState start(std::span<const double> x0);
};

/// What one accelerated step did; handed to observers.
struct StepRecord {
  std::size_t k = 0;  // iteration index of the step just taken
  double gamma = 0.0;
  double tau = 0.0;
  std::size_t evals = 0;
  std::span<const double> x;       // x_{k+1}
  std::span<const double> y;       // y_{k+1}
  std::span<const double> z;       // z_{k+1}
  std::span<const double> z_prev;  // z_k
  std::span<const double> y_prev;  // y_k
};

using StepObserver = std::function<void(const StepRecord&)>;

struct RunOptions {
  std::size_t T = 0;
  std::uint64_t seed = 0;
  /// 0 selects ceil(n / b).
  std::size_t trace_every = 0;
  const Reference* reference = nullptr;
  StepObserver observer;
  /// Stop once eval_count reaches this many component evaluations (0: off).
  std::size_t max_evals = 0;
  /// Stop at the first traced row with subopt <= this (needs a reference;
  /// 0 disables).
  double stop_below = 0.0;
  /// Stop at the first traced row whose objective is not finite.
  bool stop_on_divergence = true;
};

/// Workspace for accel_step; sized to m on first use.
struct StepScratch {
  DenseVector grad;
  DenseVector z_prev;
  DenseVector y_prev;
};

/// One iteration of the linear-coupling scheme:
///   x_{k+1} = tau_k z_k + (1 - tau_k) y_k
///   grad    = estimate of grad f(x_{k+1})
///   z_{k+1} = prox_{gamma_k g}(z_k - gamma_k grad)
///   y_{k+1} = tau_k z_{k+1} + (1 - tau_k) y_k
/// Draws (coin, minibatch) from `rng` unless `first_gradient` is supplied,
/// in which case that vector is used as the estimate (the k = 0 step after
/// init_estimator). Returns the number of component evaluations spent.
StepRecord accel_step(SolverState& state, const CompositeObjective& obj,
                      EstimatorState& estimator, std::size_t b,
                      const Schedule& schedule, Rng& rng, StepScratch& scratch,
                      std::span<const double> first_gradient = {});

RunResult run_accelerated(const CompositeObjective& obj,
                          const EstimatorOptions& est, const Schedule& schedule,
                          std::span<const double> x0, const RunOptions& opts);

struct NonAccelOptions {
  double gamma = 0.0;
  /// SVRG/SARAH: recompute the full gradient every `epoch_length` iterations
  /// instead of by coin flip.
  bool epoch_deterministic = false;
  /// 0 selects 2n.
  std::size_t epoch_length = 0;
};

/// x_{k+1} = prox_{gamma g}(x_k - gamma * estimate of grad f(x_k)).
RunResult run_nonaccelerated(const CompositeObjective& obj,
                             const EstimatorOptions& est,
                             const NonAccelOptions& nacc,
                             std::span<const double> x0, const RunOptions& opts);

struct ReferenceOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  /// Inertial forward-backward with gradient-based restart.
  bool accelerated = true;
};

struct ReferenceResult {
  DenseVector x;
  double F = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;  // final ||x_{k+1} - x_k|| / gamma
  bool converged = false;
};

/// Forward-backward with gamma = 1/L until the gradient-mapping norm drops
/// below tol. Non-convergence is reported, not thrown.
ReferenceResult run_reference(const CompositeObjective& obj,
                              std::span<const double> x0,
                              const ReferenceOptions& opts = {});

}  // namespace accvr
