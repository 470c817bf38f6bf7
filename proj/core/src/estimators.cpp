#include "accvr/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "accvr/errors.hpp"

namespace accvr {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <class S>
S& expect_state(EstimatorState& state, const char* op) {
  S* s = std::get_if<S>(&state);
  if (s == nullptr) {
    throw ContractError(std::string(op) + ": estimator state holds " +
                        std::string(to_string(kind_of(state))));
  }
  return *s;
}

void check_point(const CompositeObjective& obj, std::span<const double> x,
                 std::span<double> out) {
  if (x.size() != obj.m() || out.size() != obj.m()) {
    throw StructuralError("estimator point/output has wrong length");
  }
}

void check_minibatch(const Minibatch& mb, std::size_t n) {
  if (mb.indices.empty()) throw ContractError("empty minibatch");
  for (std::size_t t = 0; t < mb.indices.size(); ++t) {
    if (mb.indices[t] >= n) throw ContractError("minibatch index out of range");
    if (t > 0 && mb.indices[t] <= mb.indices[t - 1]) {
      throw ContractError("minibatch indices must be sorted and distinct");
    }
  }
}

std::size_t binomial_saturating(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // r * num / i is exact at every step; bail out before overflow.
    if (r > kMax / num) return kMax;
    r = r * num / i;
  }
  return r;
}

bool is_coin_kind(const EstimatorState& s) {
  return std::holds_alternative<SvrgState>(s) ||
         std::holds_alternative<SarahState>(s);
}

double coin_p(const EstimatorState& s) {
  if (auto* v = std::get_if<SvrgState>(&s)) return v->p;
  if (auto* v = std::get_if<SarahState>(&s)) return v->p;
  return 1.0;
}

}  // namespace

std::string_view to_string(EstimatorKind k) noexcept {
  switch (k) {
    case EstimatorKind::Full: return "full";
    case EstimatorKind::Saga: return "saga";
    case EstimatorKind::Svrg: return "svrg";
    case EstimatorKind::Sarah: return "sarah";
    case EstimatorKind::Sarge: return "sarge";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (auto k : {EstimatorKind::Full, EstimatorKind::Saga, EstimatorKind::Svrg,
                 EstimatorKind::Sarah, EstimatorKind::Sarge}) {
    if (lower == to_string(k)) return k;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

double MsebParams::rho() const noexcept { return std::min({rho_M, rho_B, rho_F}); }

void MsebParams::validate() const {
  auto in_unit = [](double r) { return r > 0.0 && r <= 1.0; };
  if (!(M1 >= 0.0) || !(M2 >= 0.0)) throw ConfigError("MSEB: M1, M2 must be >= 0");
  if (!in_unit(rho_M) || !in_unit(rho_B) || !in_unit(rho_F)) {
    throw ConfigError("MSEB: rho_M, rho_B, rho_F must lie in (0, 1]");
  }
}

MsebParams mseb_params(EstimatorKind kind, std::size_t n, std::size_t b, double p) {
  const double nd = static_cast<double>(n);
  const double bd = static_cast<double>(b);
  switch (kind) {
    case EstimatorKind::Full: return {0.0, 0.0, 1.0, 1.0, 1.0};
    case EstimatorKind::Saga: return {3.0 * nd / (bd * bd), 0.0, bd / (2.0 * nd), 1.0, 1.0};
    case EstimatorKind::Svrg: return {3.0 * p / bd, 0.0, 1.0 / (2.0 * p), 1.0, 1.0};
    case EstimatorKind::Sarah: return {1.0, 0.0, 1.0 / p, 1.0 / p, 1.0};
    case EstimatorKind::Sarge:
      return {12.0, (27.0 + 12.0 * bd) / (nd * nd), bd / (2.0 * nd), bd / nd,
              bd / (2.0 * nd)};
  }
  return {};
}

EstimatorKind kind_of(const EstimatorState& state) noexcept {
  return std::visit(
      Overloaded{[](const FullState&) { return EstimatorKind::Full; },
                 [](const SagaState&) { return EstimatorKind::Saga; },
                 [](const SvrgState&) { return EstimatorKind::Svrg; },
                 [](const SarahState&) { return EstimatorKind::Sarah; },
                 [](const SargeState&) { return EstimatorKind::Sarge; }},
      state);
}

void EstimatorOptions::validate(std::size_t n) const {
  if (b < 1 || b > n) {
    throw ContractError("batch size b=" + std::to_string(b) +
                        " must satisfy 1 <= b <= n=" + std::to_string(n));
  }
  if ((kind == EstimatorKind::Svrg || kind == EstimatorKind::Sarah) &&
      !(p >= 1.0)) {
    throw ContractError("recompute parameter p must be >= 1");
  }
}

DenseVector table_mean(const CompositeObjective& obj,
                       std::span<const double> coef) {
  DenseVector out(obj.m(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(obj.n());
  for (std::size_t i = 0; i < obj.n(); ++i) {
    axpy_sparse(inv_n * coef[i], obj.row(i), out);
  }
  return out;
}

EstimatorInit init_estimator(const EstimatorOptions& opts,
                             const CompositeObjective& obj,
                             std::span<const double> x1) {
  const std::size_t n = obj.n();
  opts.validate(n);
  if (x1.size() != obj.m()) throw StructuralError("init point has wrong length");

  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = obj.residual_scalar(i, x1);
  // Same summation order as full_gradient_into, so the result is bitwise equal.
  DenseVector grad = table_mean(obj, resid);

  EstimatorInit out;
  out.gradient = grad;
  out.evals = n;
  const DenseVector x(x1.begin(), x1.end());
  switch (opts.kind) {
    case EstimatorKind::Full: out.state = FullState{}; break;
    case EstimatorKind::Saga: out.state = SagaState{std::move(resid), grad}; break;
    case EstimatorKind::Svrg: out.state = SvrgState{x, grad, opts.p}; break;
    case EstimatorKind::Sarah: out.state = SarahState{grad, x, opts.p}; break;
    case EstimatorKind::Sarge: {
      const double scale = static_cast<double>(opts.b) / static_cast<double>(n);
      for (double& r : resid) r *= scale;
      DenseVector psibar = table_mean(obj, resid);
      out.state = SargeState{std::move(resid), std::move(psibar), grad, x};
      break;
    }
  }
  return out;
}

Minibatch sample_minibatch(Rng& rng, std::size_t n, std::size_t b) {
  if (b < 1 || b > n) {
    throw ContractError("minibatch size b=" + std::to_string(b) +
                        " must satisfy 1 <= b <= n=" + std::to_string(n));
  }
  Minibatch mb;
  mb.indices.reserve(b);
  if (b == n) {
    for (std::size_t i = 0; i < n; ++i) mb.indices.push_back(i);
    return mb;
  }
  if (b == 1) {
    mb.indices.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    return mb;
  }
  // Floyd: for j = n-b .. n-1 pick t in [0, j]; take t unless seen, else j.
  std::unordered_set<std::size_t> seen;
  seen.reserve(2 * b);
  for (std::size_t j = n - b; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = seen.insert(t).second ? t : j;
    if (pick == j) seen.insert(j);
    mb.indices.push_back(pick);
  }
  std::sort(mb.indices.begin(), mb.indices.end());
  return mb;
}

SampleDraw draw_sample(Rng& rng, const EstimatorState& state, std::size_t n,
                       std::size_t b) {
  SampleDraw draw;
  if (std::holds_alternative<FullState>(state)) return draw;
  if (is_coin_kind(state)) {
    const double p = coin_p(state);
    const bool recompute =
        std::bernoulli_distribution(1.0 / p)(rng);
    if (recompute) {
      draw.coin = Coin::Recompute;
      return draw;
    }
  }
  draw.minibatch = sample_minibatch(rng, n, b);
  return draw;
}

std::size_t full_estimate(const CompositeObjective& obj,
                          std::span<const double> x_next, std::span<double> out) {
  check_point(obj, x_next, out);
  obj.full_gradient_into(x_next, out);
  return obj.n();
}

std::size_t saga_estimate(SagaState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const Minibatch& mb,
                          std::span<double> out) {
  check_point(obj, x_next, out);
  check_minibatch(mb, obj.n());
  const double inv_b = 1.0 / static_cast<double>(mb.size());
  const double inv_n = 1.0 / static_cast<double>(obj.n());
  std::copy(state.gbar.begin(), state.gbar.end(), out.begin());
  for (std::size_t j : mb.indices) {
    const double fresh = obj.residual_scalar(j, x_next);
    const double delta = fresh - state.alpha[j];
    axpy_sparse(inv_b * delta, obj.row(j), out);
    axpy_sparse(inv_n * delta, obj.row(j), state.gbar);
    state.alpha[j] = fresh;
  }
  return mb.size();
}

std::size_t svrg_estimate(SvrgState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const SampleDraw& draw,
                          std::span<double> out) {
  check_point(obj, x_next, out);
  if (draw.coin == Coin::Recompute) {
    obj.full_gradient_into(x_next, out);
    state.anchor_x.assign(x_next.begin(), x_next.end());
    state.anchor_grad.assign(out.begin(), out.end());
    return obj.n();
  }
  const auto& mb = draw.minibatch;
  check_minibatch(mb, obj.n());
  const double inv_b = 1.0 / static_cast<double>(mb.size());
  std::copy(state.anchor_grad.begin(), state.anchor_grad.end(), out.begin());
  for (std::size_t j : mb.indices) {
    const double d = obj.residual_scalar(j, x_next) -
                     obj.residual_scalar(j, state.anchor_x);
    axpy_sparse(inv_b * d, obj.row(j), out);
  }
  return 2 * mb.size();
}

std::size_t sarah_estimate(SarahState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const SampleDraw& draw,
                           std::span<double> out) {
  check_point(obj, x_next, out);
  std::size_t evals = 0;
  if (draw.coin == Coin::Recompute) {
    obj.full_gradient_into(x_next, out);
    evals = obj.n();
  } else {
    const auto& mb = draw.minibatch;
    check_minibatch(mb, obj.n());
    const double inv_b = 1.0 / static_cast<double>(mb.size());
    std::copy(state.prev_estimate.begin(), state.prev_estimate.end(), out.begin());
    for (std::size_t j : mb.indices) {
      const double d =
          obj.residual_scalar(j, x_next) - obj.residual_scalar(j, state.prev_x);
      axpy_sparse(inv_b * d, obj.row(j), out);
    }
    evals = 2 * mb.size();
  }
  state.prev_estimate.assign(out.begin(), out.end());
  state.prev_x.assign(x_next.begin(), x_next.end());
  return evals;
}

std::size_t sarge_estimate(SargeState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const Minibatch& mb,
                           std::span<double> out) {
  check_point(obj, x_next, out);
  check_minibatch(mb, obj.n());
  const double nd = static_cast<double>(obj.n());
  const double bd = static_cast<double>(mb.size());
  const double inv_b = 1.0 / bd;
  const double inv_n = 1.0 / nd;
  const double keep = 1.0 - bd / nd;

  // psibar + (1 - b/n) * prev_estimate, then the per-sample corrections.
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = state.psibar[j] + keep * state.prev_estimate[j];
  }
  for (std::size_t j : mb.indices) {
    const double at_next = obj.residual_scalar(j, x_next);
    const double at_prev = obj.residual_scalar(j, state.prev_x);
    const double coef = inv_b * (at_next - state.psi[j] - keep * at_prev);
    axpy_sparse(coef, obj.row(j), out);
    const double fresh = at_next - keep * at_prev;
    axpy_sparse(inv_n * (fresh - state.psi[j]), obj.row(j), state.psibar);
    state.psi[j] = fresh;
  }
  state.prev_estimate.assign(out.begin(), out.end());
  state.prev_x.assign(x_next.begin(), x_next.end());
  return 2 * mb.size();
}

std::size_t saga_estimate(EstimatorState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const Minibatch& mb,
                          std::span<double> out) {
  return saga_estimate(expect_state<SagaState>(state, "saga_estimate"), obj,
                       x_next, mb, out);
}

std::size_t svrg_estimate(EstimatorState& state, const CompositeObjective& obj,
                          std::span<const double> x_next, const SampleDraw& draw,
                          std::span<double> out) {
  return svrg_estimate(expect_state<SvrgState>(state, "svrg_estimate"), obj,
                       x_next, draw, out);
}

std::size_t sarah_estimate(EstimatorState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const SampleDraw& draw,
                           std::span<double> out) {
  return sarah_estimate(expect_state<SarahState>(state, "sarah_estimate"), obj,
                        x_next, draw, out);
}

std::size_t sarge_estimate(EstimatorState& state, const CompositeObjective& obj,
                           std::span<const double> x_next, const Minibatch& mb,
                           std::span<double> out) {
  return sarge_estimate(expect_state<SargeState>(state, "sarge_estimate"), obj,
                        x_next, mb, out);
}

std::size_t estimate(EstimatorState& state, const CompositeObjective& obj,
                     std::span<const double> x_next, const SampleDraw& draw,
                     std::span<double> out) {
  return std::visit(
      Overloaded{
          [&](FullState&) { return full_estimate(obj, x_next, out); },
          [&](SagaState& s) { return saga_estimate(s, obj, x_next, draw.minibatch, out); },
          [&](SvrgState& s) { return svrg_estimate(s, obj, x_next, draw, out); },
          [&](SarahState& s) { return sarah_estimate(s, obj, x_next, draw, out); },
          [&](SargeState& s) { return sarge_estimate(s, obj, x_next, draw.minibatch, out); }},
      state);
}

std::size_t outcome_count(const EstimatorState& state, std::size_t n,
                          std::size_t b) {
  if (std::holds_alternative<FullState>(state)) return 1;
  const std::size_t subsets = binomial_saturating(n, b);
  if (!is_coin_kind(state)) return subsets;
  if (subsets == std::numeric_limits<std::size_t>::max()) return subsets;
  return subsets + 1;
}

void for_each_outcome(
    const EstimatorState& state, const CompositeObjective& obj,
    std::span<const double> x_next, std::size_t b,
    const std::function<void(double, std::span<const double>)>& visit,
    std::size_t max_outcomes) {
  const std::size_t n = obj.n();
  if (b < 1 || b > n) throw ContractError("enumeration needs 1 <= b <= n");
  const std::size_t count = outcome_count(state, n, b);
  if (count > max_outcomes) {
    throw EnumerationTooLarge("one-step law has " + std::to_string(count) +
                              " outcomes (cap " + std::to_string(max_outcomes) + ")");
  }
  DenseVector out(obj.m());
  auto run = [&](double prob, const SampleDraw& draw) {
    EstimatorState scratch = state;
    estimate(scratch, obj, x_next, draw, out);
    visit(prob, out);
  };

  if (std::holds_alternative<FullState>(state)) {
    run(1.0, SampleDraw{});
    return;
  }

  double continue_mass = 1.0;
  if (is_coin_kind(state)) {
    const double p = coin_p(state);
    SampleDraw recompute;
    recompute.coin = Coin::Recompute;
    run(1.0 / p, recompute);
    continue_mass = 1.0 - 1.0 / p;
    if (continue_mass == 0.0) return;
  }

  const double prob = continue_mass / static_cast<double>(binomial_saturating(n, b));
  SampleDraw draw;
  auto& idx = draw.minibatch.indices;
  idx.resize(b);
  for (std::size_t t = 0; t < b; ++t) idx[t] = t;
  while (true) {
    run(prob, draw);
    // Next b-combination in lexicographic order.
    std::size_t t = b;
    while (t > 0 && idx[t - 1] == n - b + (t - 1)) --t;
    if (t == 0) break;
    ++idx[t - 1];
    for (std::size_t u = t; u < b; ++u) idx[u] = idx[u - 1] + 1;
  }
}

DenseVector exact_conditional_expectation(const EstimatorState& state,
                                          const CompositeObjective& obj,
                                          std::span<const double> x_next,
                                          std::size_t b,
                                          std::size_t max_outcomes) {
  DenseVector mean(obj.m(), 0.0);
  for_each_outcome(
      state, obj, x_next, b,
      [&](double prob, std::span<const double> est) { axpy(prob, est, mean); },
      max_outcomes);
  return mean;
}

double exact_conditional_mse(const EstimatorState& state,
                             const CompositeObjective& obj,
                             std::span<const double> x_next, std::size_t b,
                             std::size_t max_outcomes) {
  const DenseVector grad = obj.full_gradient(x_next);
  double mse = 0.0;
  for_each_outcome(
      state, obj, x_next, b,
      [&](double prob, std::span<const double> est) {
        mse += prob * dist_sq(est, grad);
      },
      max_outcomes);
  return mse;
}

}  // namespace accvr
