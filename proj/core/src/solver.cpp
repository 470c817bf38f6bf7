#include "accvr/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "accvr/errors.hpp"
#include "accvr/prox.hpp"

namespace accvr {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::size_t default_trace_every(const CompositeObjective& obj, std::size_t b) {
  return (obj.n() + b - 1) / b;
}

TraceRow make_row(const CompositeObjective& obj, std::size_t k,
                  std::size_t evals, std::span<const double> f_point,
                  std::span<const double> d_point, const Reference* ref,
                  double wall_ms, std::uint64_t seed) {
  TraceRow row;
  row.k = k;
  row.eval_count = evals;
  row.eff_passes = static_cast<double>(evals) / static_cast<double>(obj.n());
  row.F = obj.value(f_point);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  row.subopt = ref ? row.F - ref->F_star : kNaN;
  row.dist_sq = ref ? dist_sq(d_point, ref->x_star) : kNaN;
  row.wall_ms = wall_ms;
  row.seed = seed;
  return row;
}

bool should_stop(const RunOptions& opts, const TraceRow& row) {
  if (opts.stop_on_divergence && !std::isfinite(row.F)) return true;
  if (opts.stop_below > 0.0 && opts.reference && row.subopt <= opts.stop_below) {
    return true;
  }
  return false;
}

void check_start(const CompositeObjective& obj, std::span<const double> x0) {
  if (x0.size() != obj.m()) throw StructuralError("starting point has wrong length");
}

}  // namespace

SolverState SolverState::start(std::span<const double> x0) {
  SolverState s;
  s.x.assign(x0.begin(), x0.end());
  s.y = s.x;
  s.z = s.x;
  return s;
}

StepRecord accel_step(SolverState& state, const CompositeObjective& obj,
                      EstimatorState& estimator, std::size_t b,
                      const Schedule& schedule, Rng& rng, StepScratch& scratch,
                      std::span<const double> first_gradient) {
  const std::size_t m = obj.m();
  scratch.grad.resize(m);
  scratch.z_prev = state.z;
  scratch.y_prev = state.y;

  const auto [gamma, tau] = schedule.gamma_tau(state.k);
  lincomb(tau, state.z, 1.0 - tau, state.y, state.x);

  std::size_t evals = 0;
  if (!first_gradient.empty()) {
    std::copy(first_gradient.begin(), first_gradient.end(), scratch.grad.begin());
  } else {
    const SampleDraw draw = draw_sample(rng, estimator, obj.n(), b);
    evals = estimate(estimator, obj, state.x, draw, scratch.grad);
  }

  axpy(-gamma, scratch.grad, state.z);
  prox_inplace(obj.reg(), state.z, gamma);
  lincomb(tau, state.z, 1.0 - tau, scratch.y_prev, state.y);

  StepRecord rec;
  rec.k = state.k;
  rec.gamma = gamma;
  rec.tau = tau;
  rec.evals = evals;
  rec.x = state.x;
  rec.y = state.y;
  rec.z = state.z;
  rec.z_prev = scratch.z_prev;
  rec.y_prev = scratch.y_prev;

  state.eval_count += evals;
  ++state.k;
  return rec;
}

RunResult run_accelerated(const CompositeObjective& obj,
                          const EstimatorOptions& est, const Schedule& schedule,
                          std::span<const double> x0, const RunOptions& opts) {
  check_start(obj, x0);
  est.validate(obj.n());
  const std::size_t every =
      opts.trace_every ? opts.trace_every : default_trace_every(obj, est.b);

  RunResult result;
  result.seed = opts.seed;
  SolverState state = SolverState::start(x0);
  Rng rng(opts.seed);
  StepScratch scratch;
  double wall_ms = 0.0;

  result.trace.push_back(
      make_row(obj, 0, 0, state.y, state.z, opts.reference, 0.0, opts.seed));

  if (opts.T > 0) {
    auto t0 = Clock::now();
    // x_1 = tau_0 z_0 + (1 - tau_0) y_0 = x_0 since z_0 = y_0 = x_0.
    EstimatorInit init = init_estimator(est, obj, state.z);
    state.eval_count += init.evals;
    EstimatorState estimator = std::move(init.state);
    wall_ms += ms_since(t0);

    for (std::size_t k = 0; k < opts.T; ++k) {
      t0 = Clock::now();
      const StepRecord rec =
          accel_step(state, obj, estimator, est.b, schedule, rng, scratch,
                     k == 0 ? std::span<const double>(init.gradient)
                            : std::span<const double>());
      wall_ms += ms_since(t0);
      if (opts.observer) opts.observer(rec);
      const bool out_of_budget =
          opts.max_evals > 0 && state.eval_count >= opts.max_evals;
      if (state.k % every == 0 || state.k == opts.T || out_of_budget) {
        result.trace.push_back(make_row(obj, state.k, state.eval_count, state.y,
                                        state.z, opts.reference, wall_ms,
                                        opts.seed));
        if (out_of_budget || should_stop(opts, result.trace.back())) break;
      }
    }
  }
  result.final_y = std::move(state.y);
  result.final_z = std::move(state.z);
  result.eval_count = state.eval_count;
  return result;
}

RunResult run_nonaccelerated(const CompositeObjective& obj,
                             const EstimatorOptions& est,
                             const NonAccelOptions& nacc,
                             std::span<const double> x0, const RunOptions& opts) {
  check_start(obj, x0);
  est.validate(obj.n());
  if (!(nacc.gamma > 0.0)) throw ContractError("step size gamma must be > 0");
  const std::size_t n = obj.n();
  const std::size_t every =
      opts.trace_every ? opts.trace_every : default_trace_every(obj, est.b);
  const std::size_t epoch = nacc.epoch_length ? nacc.epoch_length : 2 * n;
  const bool by_epoch = nacc.epoch_deterministic &&
                        (est.kind == EstimatorKind::Svrg ||
                         est.kind == EstimatorKind::Sarah);

  RunResult result;
  result.seed = opts.seed;
  DenseVector x(x0.begin(), x0.end());
  DenseVector grad(obj.m());
  Rng rng(opts.seed);
  std::size_t evals = 0;
  double wall_ms = 0.0;

  result.trace.push_back(make_row(obj, 0, 0, x, x, opts.reference, 0.0, opts.seed));

  if (opts.T > 0) {
    auto t0 = Clock::now();
    EstimatorInit init = init_estimator(est, obj, x);
    EstimatorState estimator = std::move(init.state);
    grad = std::move(init.gradient);
    evals += init.evals;
    wall_ms += ms_since(t0);

    for (std::size_t k = 0; k < opts.T; ++k) {
      t0 = Clock::now();
      if (k > 0) {
        SampleDraw draw;
        if (by_epoch) {
          if (k % epoch == 0) {
            draw.coin = Coin::Recompute;
          } else {
            draw.minibatch = sample_minibatch(rng, n, est.b);
          }
        } else {
          draw = draw_sample(rng, estimator, n, est.b);
        }
        evals += estimate(estimator, obj, x, draw, grad);
      }
      axpy(-nacc.gamma, grad, x);
      prox_inplace(obj.reg(), x, nacc.gamma);
      wall_ms += ms_since(t0);
      const std::size_t done = k + 1;
      const bool out_of_budget = opts.max_evals > 0 && evals >= opts.max_evals;
      if (done % every == 0 || done == opts.T || out_of_budget) {
        result.trace.push_back(
            make_row(obj, done, evals, x, x, opts.reference, wall_ms, opts.seed));
        if (out_of_budget || should_stop(opts, result.trace.back())) break;
      }
    }
  }
  result.final_y = x;
  result.final_z = std::move(x);
  result.eval_count = evals;
  return result;
}

ReferenceResult run_reference(const CompositeObjective& obj,
                              std::span<const double> x0,
                              const ReferenceOptions& opts) {
  check_start(obj, x0);
  if (!(opts.tol > 0.0)) throw ContractError("reference tolerance must be > 0");
  const double gamma = 1.0 / obj.L();
  const std::size_t m = obj.m();

  ReferenceResult res;
  DenseVector x(x0.begin(), x0.end());
  DenseVector x_next(m), y = x, grad(m);
  double t = 1.0;

  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const DenseVector& base = opts.accelerated ? y : x;
    obj.full_gradient_into(base, grad);
    for (std::size_t j = 0; j < m; ++j) x_next[j] = base[j] - gamma * grad[j];
    prox_inplace(obj.reg(), x_next, gamma);

    res.residual = std::sqrt(dist_sq(x_next, base)) / gamma;
    res.iterations = it + 1;

    if (opts.accelerated) {
      // Restart momentum when it points uphill.
      double uphill = 0.0;
      for (std::size_t j = 0; j < m; ++j) uphill += (y[j] - x_next[j]) * (x_next[j] - x[j]);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      if (uphill > 0.0) {
        t = 1.0;
        y = x_next;
      } else {
        for (std::size_t j = 0; j < m; ++j) y[j] = x_next[j] + beta * (x_next[j] - x[j]);
        t = t_next;
      }
    }
    x.swap(x_next);
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.F = obj.value(x);
  res.x = std::move(x);
  return res;
}

}  // namespace accvr
