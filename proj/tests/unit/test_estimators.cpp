#include <cmath>
#include <random>
#include <variant>

#include "accvr/errors.hpp"
#include "accvr/estimators.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using namespace accvr;
using testing_support::make_objective;
using testing_support::random_dataset;
using testing_support::random_state;
using testing_support::random_vector;

namespace {

const EstimatorKind kAllKinds[] = {EstimatorKind::Full, EstimatorKind::Saga,
                                   EstimatorKind::Svrg, EstimatorKind::Sarah,
                                   EstimatorKind::Sarge};

CompositeObjective small_objective(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                   Loss loss = Loss::SquaredError) {
  return make_objective(random_dataset(rng, n, m, 1.0, loss == Loss::Logistic), loss,
                        Regularizer::None, 0.0);
}

SampleDraw continue_with(std::vector<std::size_t> idx) {
  return SampleDraw{Minibatch{std::move(idx)}, Coin::Continue};
}

// grad f(x_next) - (1 - rho_B)(grad f(x_k) - estimate_k)
DenseVector biased_target(const CompositeObjective& obj, std::span<const double> x_next,
                          std::span<const double> x_prev,
                          std::span<const double> prev_estimate, double rho_B) {
  DenseVector out = obj.full_gradient(x_next);
  const auto g_prev = obj.full_gradient(x_prev);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] -= (1.0 - rho_B) * (g_prev[j] - prev_estimate[j]);
  }
  return out;
}

}  // namespace

TEST_CASE("init_estimator returns the exact full gradient") {
  std::mt19937_64 rng(1);
  const auto obj = small_objective(rng, 9, 4);
  const auto x = random_vector(rng, 4);
  for (auto kind : kAllKinds) {
    const auto init = init_estimator(EstimatorOptions{kind, 2, 5.0}, obj, x);
    CHECK(init.gradient == obj.full_gradient(x));
    CHECK(init.evals == obj.n());
    CHECK(kind_of(init.state) == kind);
    if (kind == EstimatorKind::Saga) {
      CHECK(std::get<SagaState>(init.state).gbar == init.gradient);
    }
    if (kind == EstimatorKind::Svrg) {
      CHECK(std::get<SvrgState>(init.state).anchor_grad == obj.full_gradient(x));
    }
  }
}

TEST_CASE("options validation") {
  CHECK_THROWS_AS((EstimatorOptions{EstimatorKind::Saga, 0, 1.0}.validate(5)), ContractError);
  CHECK_THROWS_AS((EstimatorOptions{EstimatorKind::Saga, 6, 1.0}.validate(5)), ContractError);
  CHECK_THROWS_AS((EstimatorOptions{EstimatorKind::Svrg, 1, 0.5}.validate(5)), ContractError);
  CHECK_NOTHROW((EstimatorOptions{EstimatorKind::Sarah, 5, 1.0}.validate(5)));
  CHECK(parse_estimator_kind("SARGE") == EstimatorKind::Sarge);
  CHECK(to_string(EstimatorKind::Svrg) == "svrg");
  CHECK_THROWS_AS(parse_estimator_kind("katyusha"), ConfigError);
}

TEST_CASE("MSEB constants per estimator") {
  const auto saga = mseb_params(EstimatorKind::Saga, 100, 2, 0.0);
  CHECK(saga.M1 == 75.0);
  CHECK(saga.rho_M == 0.01);
  const auto svrg = mseb_params(EstimatorKind::Svrg, 100, 4, 200.0);
  CHECK(svrg.M1 == 150.0);
  CHECK(svrg.rho_M == 1.0 / 400.0);
  const auto sarah = mseb_params(EstimatorKind::Sarah, 100, 1, 8.0);
  CHECK(sarah.rho_B == 0.125);
  const auto sarge = mseb_params(EstimatorKind::Sarge, 30, 3, 0.0);
  CHECK(sarge.M2 == doctest::Approx(63.0 / 900.0));
  CHECK(sarge.rho_B == 0.1);
  CHECK(sarge.rho_F == 0.05);
  CHECK(sarge.rho() == 0.05);
}

TEST_CASE("sample_minibatch") {
  Rng rng(5);
  const auto all = sample_minibatch(rng, 6, 6);
  CHECK(all.indices == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_minibatch(a, 20, 4).indices == sample_minibatch(b, 20, 4).indices);
  }

  Rng r(3);
  for (int i = 0; i < 100; ++i) {
    const auto mb = sample_minibatch(r, 10, 4);
    REQUIRE(mb.size() == 4);
    for (std::size_t t = 1; t < 4; ++t) CHECK(mb.indices[t - 1] < mb.indices[t]);
  }
}

TEST_CASE("minibatch inclusion frequencies are b/n") {
  Rng rng(99);
  const std::size_t n = 10, b = 3, draws = 100000;
  std::vector<std::size_t> hits(n, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    for (auto i : sample_minibatch(rng, n, b).indices) ++hits[i];
  }
  const double q = static_cast<double>(b) / n;
  const double mean = q * draws;
  const double sd = std::sqrt(draws * q * (1.0 - q));
  for (auto h : hits) CHECK(std::abs(static_cast<double>(h) - mean) <= 3.0 * sd);
}

TEST_CASE("coin frequency is 1/p") {
  std::mt19937_64 seed_rng(4);
  const auto obj = small_objective(seed_rng, 5, 2);
  const auto init = init_estimator(EstimatorOptions{EstimatorKind::Svrg, 1, 4.0}, obj,
                                   DenseVector(2, 0.0));
  Rng rng(8);
  const std::size_t draws = 100000;
  std::size_t recompute = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto s = draw_sample(rng, init.state, 5, 1);
    if (s.coin == Coin::Recompute) {
      ++recompute;
      CHECK(s.minibatch.size() == 0);
    }
  }
  const double sd = std::sqrt(draws * 0.25 * 0.75);
  CHECK(std::abs(static_cast<double>(recompute) - 0.25 * draws) <= 3.0 * sd);
}

TEST_CASE("SAGA estimate") {
  std::mt19937_64 rng(10);
  const auto obj = small_objective(rng, 3, 4);
  const auto x = random_vector(rng, 4);
  DenseVector out(4);

  SUBCASE("table already at x_next") {
    auto init = init_estimator(EstimatorOptions{EstimatorKind::Saga, 1}, obj, x);
    CHECK(saga_estimate(init.state, obj, x, Minibatch{{1}}, out) == 1);
    CHECK(max_abs_diff(out, obj.full_gradient(x)) <= 1e-15);
  }
  SUBCASE("b = n") {
    auto state = random_state(EstimatorOptions{EstimatorKind::Saga, 3}, obj, rng, 3);
    CHECK(saga_estimate(state, obj, x, Minibatch{{0, 1, 2}}, out) == 3);
    CHECK(max_abs_diff(out, obj.full_gradient(x)) <= 1e-14);
  }
  SUBCASE("average over the three singleton batches") {
    const auto state = random_state(EstimatorOptions{EstimatorKind::Saga, 1}, obj, rng, 4);
    DenseVector mean(4, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      auto copy = state;
      saga_estimate(copy, obj, x, Minibatch{{j}}, out);
      axpy(1.0 / 3.0, out, mean);
    }
    CHECK(max_abs_diff(mean, obj.full_gradient(x)) <= 1e-12);
  }
}

TEST_CASE("SVRG estimate") {
  std::mt19937_64 rng(11);
  const auto obj = small_objective(rng, 3, 4);
  const auto x = random_vector(rng, 4);
  DenseVector out(4);
  auto state = random_state(EstimatorOptions{EstimatorKind::Svrg, 1, 3.0}, obj, rng, 3);

  CHECK(svrg_estimate(state, obj, x, SampleDraw{{}, Coin::Recompute}, out) == 3);
  CHECK(out == obj.full_gradient(x));
  CHECK(std::get<SvrgState>(state).anchor_x == x);

  CHECK(svrg_estimate(state, obj, x, continue_with({2}), out) == 2);
  CHECK(max_abs_diff(out, obj.full_gradient(x)) <= 1e-15);

  const auto y = random_vector(rng, 4);
  const auto mean = exact_conditional_expectation(state, obj, y, 1);
  DenseVector manual = DenseVector(4, 0.0);
  {
    auto copy = state;
    svrg_estimate(copy, obj, y, SampleDraw{{}, Coin::Recompute}, out);
    axpy(1.0 / 3.0, out, manual);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    auto copy = state;
    svrg_estimate(copy, obj, y, continue_with({j}), out);
    axpy((1.0 - 1.0 / 3.0) / 3.0, out, manual);
  }
  CHECK(max_abs_diff(manual, obj.full_gradient(y)) <= 1e-12);
  CHECK(max_abs_diff(mean, obj.full_gradient(y)) <= 1e-12);
}

TEST_CASE("SARAH estimate") {
  std::mt19937_64 rng(12);
  const auto obj = small_objective(rng, 4, 3);
  DenseVector out(3);
  auto state = random_state(EstimatorOptions{EstimatorKind::Sarah, 1, 3.0}, obj, rng, 5);
  const auto& s = std::get<SarahState>(state);

  SUBCASE("no movement keeps the previous estimate") {
    const auto prev = s.prev_estimate;
    const auto at = s.prev_x;
    CHECK(sarah_estimate(state, obj, at, continue_with({1}), out) == 2);
    CHECK(max_abs_diff(out, prev) <= 1e-15);
  }
  SUBCASE("recompute gives the full gradient") {
    const auto x = random_vector(rng, 3);
    CHECK(sarah_estimate(state, obj, x, SampleDraw{{}, Coin::Recompute}, out) == 4);
    CHECK(out == obj.full_gradient(x));
  }
  SUBCASE("bias recursion with p = 3") {
    const auto x = random_vector(rng, 3);
    const auto expect = biased_target(obj, x, s.prev_x, s.prev_estimate, 1.0 / 3.0);
    CHECK(max_abs_diff(exact_conditional_expectation(state, obj, x, 1), expect) <= 1e-12);
  }
}

TEST_CASE("SARGE estimate") {
  std::mt19937_64 rng(13);
  const auto obj = small_objective(rng, 4, 3);
  DenseVector out(3);

  SUBCASE("b = n") {
    auto state = random_state(EstimatorOptions{EstimatorKind::Sarge, 4}, obj, rng, 3);
    const auto x = random_vector(rng, 3);
    CHECK(sarge_estimate(state, obj, x, Minibatch{{0, 1, 2, 3}}, out) == 8);
    CHECK(max_abs_diff(out, obj.full_gradient(x)) <= 1e-13);
  }
  SUBCASE("bias recursion with rho_B = b/n") {
    auto state = random_state(EstimatorOptions{EstimatorKind::Sarge, 1}, obj, rng, 6);
    const auto& s = std::get<SargeState>(state);
    const auto x = random_vector(rng, 3);
    const auto expect = biased_target(obj, x, s.prev_x, s.prev_estimate, 0.25);
    CHECK(max_abs_diff(exact_conditional_expectation(state, obj, x, 1), expect) <= 1e-12);
  }
  SUBCASE("unbiased right after init") {
    const auto x1 = random_vector(rng, 3);
    const auto init = init_estimator(EstimatorOptions{EstimatorKind::Sarge, 1}, obj, x1);
    const auto x2 = random_vector(rng, 3);
    CHECK(max_abs_diff(exact_conditional_expectation(init.state, obj, x2, 1),
                       obj.full_gradient(x2)) <= 1e-12);
  }
}

TEST_CASE("tag-checked overloads reject the wrong state") {
  std::mt19937_64 rng(14);
  const auto obj = small_objective(rng, 4, 2);
  auto init = init_estimator(EstimatorOptions{EstimatorKind::Saga, 1}, obj, DenseVector(2, 0.0));
  DenseVector out(2);
  const DenseVector x(2, 1.0);
  CHECK_THROWS_AS(svrg_estimate(init.state, obj, x, continue_with({0}), out), ContractError);
  CHECK_THROWS_AS(sarah_estimate(init.state, obj, x, continue_with({0}), out), ContractError);
  CHECK_THROWS_AS(sarge_estimate(init.state, obj, x, Minibatch{{0}}, out), ContractError);
  CHECK_NOTHROW(saga_estimate(init.state, obj, x, Minibatch{{0}}, out));
}

TEST_CASE("exact laws: unbiased estimators") {
  std::mt19937_64 rng(15);
  for (std::size_t n = 3; n <= 6; ++n) {
    for (std::size_t b : {1, 2}) {
      for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
        const auto obj = small_objective(rng, n, 3, loss);
        for (auto kind : {EstimatorKind::Full, EstimatorKind::Saga, EstimatorKind::Svrg}) {
          const auto state = random_state(EstimatorOptions{kind, b, 2.5}, obj, rng, 4);
          const auto x = random_vector(rng, 3);
          CHECK(max_abs_diff(exact_conditional_expectation(state, obj, x, b),
                             obj.full_gradient(x)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("exact laws: bias recursion along a trajectory") {
  std::mt19937_64 rng(16);
  for (auto kind : {EstimatorKind::Sarah, EstimatorKind::Sarge}) {
    for (std::size_t b : {1, 2}) {
      const std::size_t n = 6;
      const double p = 4.0;
      const auto obj = small_objective(rng, n, 3);
      const double rho_B = mseb_params(kind, n, b, p).rho_B;
      auto init = init_estimator(EstimatorOptions{kind, b, p}, obj, random_vector(rng, 3));
      EstimatorState state = std::move(init.state);
      Rng draw_rng(7);
      DenseVector out(3);
      for (int step = 0; step < 10; ++step) {
        const auto x = random_vector(rng, 3);
        DenseVector prev_x, prev_est;
        if (kind == EstimatorKind::Sarah) {
          prev_x = std::get<SarahState>(state).prev_x;
          prev_est = std::get<SarahState>(state).prev_estimate;
        } else {
          prev_x = std::get<SargeState>(state).prev_x;
          prev_est = std::get<SargeState>(state).prev_estimate;
        }
        const auto expect = biased_target(obj, x, prev_x, prev_est, rho_B);
        CHECK(max_abs_diff(exact_conditional_expectation(state, obj, x, b), expect) <= 1e-12);
        estimate(state, obj, x, draw_sample(draw_rng, state, n, b), out);
      }
    }
  }
}

TEST_CASE("exact laws leave the live state untouched") {
  std::mt19937_64 rng(17);
  const auto obj = small_objective(rng, 5, 3);
  const auto state = random_state(EstimatorOptions{EstimatorKind::Saga, 2}, obj, rng, 3);
  const auto before = std::get<SagaState>(state).alpha;
  exact_conditional_mse(state, obj, random_vector(rng, 3), 2);
  CHECK(std::get<SagaState>(state).alpha == before);
}

TEST_CASE("outcome counts and the enumeration cap") {
  std::mt19937_64 rng(18);
  const auto obj = small_objective(rng, 6, 2);
  const auto saga = random_state(EstimatorOptions{EstimatorKind::Saga, 2}, obj, rng, 0);
  const auto svrg = random_state(EstimatorOptions{EstimatorKind::Svrg, 2, 3.0}, obj, rng, 0);
  const auto full = random_state(EstimatorOptions{EstimatorKind::Full, 1}, obj, rng, 0);
  CHECK(outcome_count(saga, 6, 2) == 15);
  CHECK(outcome_count(svrg, 6, 2) == 16);
  CHECK(outcome_count(full, 6, 2) == 1);
  CHECK(outcome_count(saga, 60, 30) == 118264581564861424ULL);
  CHECK_THROWS_AS(exact_conditional_expectation(saga, obj, DenseVector(2, 0.0), 2, 10),
                  EnumerationTooLarge);

  double total = 0.0;
  for_each_outcome(svrg, obj, DenseVector(2, 0.0), 2,
                   [&](double prob, std::span<const double>) { total += prob; });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact MSE") {
  std::mt19937_64 rng(19);
  const auto obj = small_objective(rng, 5, 3);
  const auto x = random_vector(rng, 3);
  const auto full = random_state(EstimatorOptions{EstimatorKind::Full, 1}, obj, rng, 0);
  CHECK(exact_conditional_mse(full, obj, x, 1) == 0.0);
  const auto at_x = init_estimator(EstimatorOptions{EstimatorKind::Saga, 1}, obj, x);
  CHECK(exact_conditional_mse(at_x.state, obj, x, 1) <= 1e-28);
}

TEST_CASE("SAGA variance bound against the stored table") {
  std::mt19937_64 rng(20);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 4;
    const std::size_t b = 1 + trial % 2;
    const auto obj = small_objective(rng, n, 3, trial % 3 == 0 ? Loss::Logistic
                                                                : Loss::SquaredError);
    const auto state = random_state(EstimatorOptions{EstimatorKind::Saga, b}, obj, rng, 5);
    const auto& s = std::get<SagaState>(state);
    const auto x = random_vector(rng, 3);
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      DenseVector diff = obj.component_gradient(i, x);
      axpy_sparse(-s.alpha[i], obj.row(i), diff);
      bound += norm_sq(diff);
    }
    bound /= static_cast<double>(b * n);
    if (exact_conditional_mse(state, obj, x, b) > bound * (1.0 + 1e-12) + 1e-15) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("incremental table means stay accurate") {
  std::mt19937_64 rng(21);
  const auto obj = small_objective(rng, 40, 6);
  for (auto kind : {EstimatorKind::Saga, EstimatorKind::Sarge}) {
    auto init = init_estimator(EstimatorOptions{kind, 3}, obj, random_vector(rng, 6));
    EstimatorState state = std::move(init.state);
    Rng draw_rng(2);
    DenseVector out(6);
    for (int step = 0; step < 10000; ++step) {
      estimate(state, obj, random_vector(rng, 6), draw_sample(draw_rng, state, 40, 3), out);
    }
    if (kind == EstimatorKind::Saga) {
      const auto& s = std::get<SagaState>(state);
      CHECK(max_abs_diff(s.gbar, table_mean(obj, s.alpha)) <= 1e-8);
    } else {
      const auto& s = std::get<SargeState>(state);
      CHECK(max_abs_diff(s.psibar, table_mean(obj, s.psi)) <= 1e-8);
    }
  }
}

TEST_CASE("evaluation counts follow the per-step contract") {
  std::mt19937_64 rng(22);
  const std::size_t n = 8, b = 3;
  const auto obj = small_objective(rng, n, 2);
  DenseVector out(2);
  for (auto kind : kAllKinds) {
    auto init = init_estimator(EstimatorOptions{kind, b, 2.0}, obj, DenseVector(2, 0.0));
    EstimatorState state = std::move(init.state);
    Rng draw_rng(5);
    for (int step = 0; step < 50; ++step) {
      const auto draw = draw_sample(draw_rng, state, n, b);
      const auto evals = estimate(state, obj, random_vector(rng, 2), draw, out);
      switch (kind) {
        case EstimatorKind::Full: CHECK(evals == n); break;
        case EstimatorKind::Saga: CHECK(evals == b); break;
        case EstimatorKind::Sarge: CHECK(evals == 2 * b); break;
        default: CHECK(evals == (draw.coin == Coin::Recompute ? n : 2 * b)); break;
      }
    }
  }
}

TEST_CASE("geometric double sum is bounded by the scaled sum") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = 1 + trial * 3;
    std::vector<double> sigma(T);
    for (auto& s : sigma) s = u(rng) * u(rng) * 10.0;
    const double rho = trial == 0 ? 1.0 : std::max(1e-3, u(rng));
    const auto check = testing_support::geometric_sum_check(sigma, rho);
    CHECK(check.lhs <= check.rhs * (1.0 + 1e-12));
  }
}
