#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "accvr/linalg.hpp"
#include "accvr/objective.hpp"

namespace accvr {

/// The generator every run owns. Draw order per iteration is fixed:
/// coin first (SVRG/SARAH only), then the minibatch.
using Rng = std::mt19937_64;

enum class EstimatorKind { Full, Saga, Svrg, Sarah, Sarge };

std::string_view to_string(EstimatorKind k) noexcept;
/// Accepts "full", "saga", "svrg", "sarah", "sarge" (case-insensitive).
EstimatorKind parse_estimator_kind(std::string_view name);

/// Bias/MSE recursion constants (M1, M2, rho_M, rho_B, rho_F).
struct MsebParams {
  double M1 = 0.0;
  double M2 = 0.0;
  double rho_M = 1.0;
  double rho_B = 1.0;
  double rho_F = 1.0;

  double rho() const noexcept;
  /// Throws ConfigError unless M1, M2 >= 0 and every rho lies in (0, 1].
  void validate() const;
};

/// Constants proven for each estimator:
///   Full  (0, 0, 1, 1, 1)
///   SAGA  (3n/b^2, 0, b/(2n), 1, 1)
///   SVRG  (3p/b, 0, 1/(2p), 1, 1)
///   SARAH (1, 0, 1/p, 1/p, 1)
///   SARGE (12, (27 + 12b)/n^2, b/(2n), b/n, b/(2n))
MsebParams mseb_params(EstimatorKind kind, std::size_t n, std::size_t b, double p);

struct Minibatch {
  std::vector<std::size_t> indices;  // sorted, distinct

  std::size_t size() const noexcept { return indices.size(); }
};

enum class Coin { Recompute, Continue };

struct SampleDraw {
  Minibatch minibatch;
  Coin coin = Coin::Continue;
};

struct FullState {};

struct SagaState {
  std::vector<double> alpha;  // stored gradient i is alpha[i] * a_i
  DenseVector gbar;           // (1/n) sum_i alpha[i] * a_i
};

struct SvrgState {
  DenseVector anchor_x;
  DenseVector anchor_grad;  // grad f(anchor_x)
  double p = 1.0;
};

struct SarahState {
  DenseVector prev_estimate;
  DenseVector prev_x;
  double p = 1.0;
};

struct SargeState {
  std::vector<double> psi;  // psi_i = psi[i] * a_i
  DenseVector psibar;       // (1/n) sum_i psi[i] * a_i
  DenseVector prev_estimate;
  DenseVector prev_x;
};

using EstimatorState =
    std::variant<FullState, SagaState, SvrgState, SarahState, SargeState>;

EstimatorKind kind_of(const EstimatorState& state) noexcept;

struct EstimatorOptions {
  EstimatorKind kind = EstimatorKind::Saga;
  std::size_t b = 1;
  /// Full gradient recompute happens with probability 1/p (SVRG, SARAH).
  double p = 1.0;

  void validate(std::size_t n) const;
};

struct EstimatorInit {
  EstimatorState state;
  DenseVector gradient;  // exactly grad f(x1)
  std::size_t evals = 0;
};

/// Fills the estimator memory at x1 with one full pass (evals == n).
/// SARGE starts from psi_i = (b/n) grad f_i(x1), the fixed point of its table
/// update, so that a repeated point reproduces grad f(x1) exactly.
EstimatorInit init_estimator(const EstimatorOptions& opts,
                             const CompositeObjective& obj,
                             std::span<const double> x1);

/// Uniform b-subset of {0..n-1}, sorted. Floyd's algorithm: exactly b draws.
Minibatch sample_minibatch(Rng& rng, std::size_t n, std::size_t b);

/// Draws this iteration's randomness for `state`: nothing for Full, a coin
/// (Recompute w.p. 1/p) for SVRG/SARAH followed by a minibatch on Continue,
/// and a minibatch otherwise.
SampleDraw draw_sample(Rng& rng, const EstimatorState& state, std::size_t n,
                       std::size_t b);

// Each estimate writes the new gradient estimate into `out` (length m),
// updates the estimator memory, and returns the number of component
// gradient evaluations it spent.

std::size_t full_estimate(const CompositeObjective& obj,
                          std::span<const double> x_next, std::span<double> out);
std::size_t saga_estimate(SagaState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const Minibatch& mb,
                          std::span<double> out);
std::size_t svrg_estimate(SvrgState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const SampleDraw& draw,
                          std::span<double> out);
std::size_t sarah_estimate(SarahState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const SampleDraw& draw,
                           std::span<double> out);
std::size_t sarge_estimate(SargeState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const Minibatch& mb,
                           std::span<double> out);

/// Tag-checked variants over the sum type; throw ContractError when `state`
/// holds a different estimator.
std::size_t saga_estimate(EstimatorState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const Minibatch& mb,
                          std::span<double> out);
std::size_t svrg_estimate(EstimatorState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const SampleDraw& draw,
                          std::span<double> out);
std::size_t sarah_estimate(EstimatorState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const SampleDraw& draw,
                           std::span<double> out);
std::size_t sarge_estimate(EstimatorState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const Minibatch& mb,
                           std::span<double> out);

/// Dispatches on the state's tag.
std::size_t estimate(EstimatorState& state, const CompositeObjective& obj,
                     std::span<const double> x_next, const SampleDraw& draw,
                     std::span<double> out);

// ---------------------------------------------------------------------------
// Exact-law oracles. They enumerate every (coin, minibatch) outcome of one
// step on a private copy of the state; the caller's state is never touched.

inline constexpr std::size_t kMaxEnumeratedOutcomes = 1'000'000;

/// Number of distinct outcomes of one step of `state` with batch size b.
/// Saturates at SIZE_MAX.
std::size_t outcome_count(const EstimatorState& state, std::size_t n,
                          std::size_t b);

/// Calls `visit(probability, estimate)` once per outcome. Throws
/// EnumerationTooLarge above `max_outcomes`.
void for_each_outcome(
    const EstimatorState& state, const CompositeObjective& obj,
    std::span<const double> x_next, std::size_t b,
    const std::function<void(double, std::span<const double>)>& visit,
    std::size_t max_outcomes = kMaxEnumeratedOutcomes);

/// E_k[estimate at x_next] under the one-step law.
DenseVector exact_conditional_expectation(
    const EstimatorState& state, const CompositeObjective& obj,
    std::span<const double> x_next, std::size_t b,
    std::size_t max_outcomes = kMaxEnumeratedOutcomes);

/// E_k || estimate - grad f(x_next) ||^2 under the one-step law.
double exact_conditional_mse(const EstimatorState& state,
                             const CompositeObjective& obj,
                             std::span<const double> x_next, std::size_t b,
                             std::size_t max_outcomes = kMaxEnumeratedOutcomes);

/// Recomputes (1/n) sum_i coef[i] * a_i from scratch; used to audit the
/// incrementally maintained table means.
DenseVector table_mean(const CompositeObjective& obj,
                       std::span<const double> coef);

}  // namespace accvr
