#include <cmath>
#include <random>

#include "accvr/data.hpp"
#include "accvr/objective.hpp"
#include "accvr/solver.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using namespace accvr;
using testing_support::make_objective;
using testing_support::random_dataset;
using testing_support::random_vector;

namespace {
std::shared_ptr<const SparseDataset> one_row(std::vector<double> a, double y) {
  auto d = std::make_shared<SparseDataset>();
  d->dim = a.size();
  d->rows.push_back(dense_to_row(a));
  d->labels.push_back(y);
  return d;
}
}  // namespace

TEST_CASE("component_gradient examples") {
  const auto sq = make_objective(one_row({1.0, 0.0}, 1.0), Loss::SquaredError,
                                 Regularizer::None, 0.0);
  CHECK(sq.component_gradient(0, DenseVector{0.0, 0.0}) == DenseVector{-2.0, 0.0});
  CHECK(sq.component_gradient(0, DenseVector{1.0, 7.0}) == DenseVector{0.0, 0.0});

  const auto lg = make_objective(one_row({2.0, 0.0}, 1.0), Loss::Logistic,
                                 Regularizer::None, 0.0);
  CHECK(lg.component_gradient(0, DenseVector{0.0, 0.0}) == DenseVector{-1.0, 0.0});
}

TEST_CASE("residual_scalar examples") {
  const auto sq = make_objective(one_row({1.0}, 1.0), Loss::SquaredError,
                                 Regularizer::None, 0.0);
  CHECK(sq.residual_scalar(0, DenseVector{4.0}) == 6.0);
  const auto lg = make_objective(one_row({1.0}, 1.0), Loss::Logistic, Regularizer::None, 0.0);
  CHECK(lg.residual_scalar(0, DenseVector{0.0}) == -0.5);
}

TEST_CASE("residual_scalar times a_i equals component_gradient") {
  std::mt19937_64 rng(31);
  for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
    const auto obj = make_objective(random_dataset(rng, 20, 6, 0.7, loss == Loss::Logistic),
                                    loss, Regularizer::None, 0.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = random_vector(rng, 6);
      for (std::size_t i = 0; i < obj.n(); ++i) {
        DenseVector scaled(6, 0.0);
        axpy_sparse(obj.residual_scalar(i, x), obj.row(i), scaled);
        CHECK(scaled == obj.component_gradient(i, x));
      }
    }
  }
}

TEST_CASE("full_gradient") {
  std::mt19937_64 rng(32);
  SUBCASE("n = 1 is the component gradient") {
    const auto obj = make_objective(random_dataset(rng, 1, 4), Loss::SquaredError,
                                    Regularizer::None, 0.0);
    const auto x = random_vector(rng, 4);
    CHECK(obj.full_gradient(x) == obj.component_gradient(0, x));
  }
  SUBCASE("zero at the least-squares solution of a 2x2 system") {
    auto d = std::make_shared<SparseDataset>(parse_libsvm("3 1:1 2:2\n-1 1:3 2:-1"));
    const auto obj = make_objective(d, Loss::SquaredError, Regularizer::None, 0.0);
    const auto x = testing_support::ridge_solution(*d, 0.0);
    CHECK(norm_sq(obj.full_gradient(x)) <= 1e-20);
  }
  SUBCASE("mean of three components, and the dense oracle") {
    for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
      const auto data = random_dataset(rng, 3, 5, 1.0, loss == Loss::Logistic);
      const auto obj = make_objective(data, loss, Regularizer::None, 0.0);
      const auto x = random_vector(rng, 5);
      DenseVector mean(5, 0.0);
      for (std::size_t i = 0; i < 3; ++i) axpy(1.0 / 3.0, obj.component_gradient(i, x), mean);
      CHECK(max_abs_diff(mean, obj.full_gradient(x)) <= 1e-14);
      CHECK(max_abs_diff(testing_support::dense_gradient(*data, loss, x),
                         obj.full_gradient(x)) <= 1e-13);
    }
  }
}

TEST_CASE("objective values") {
  std::mt19937_64 rng(33);
  const auto data = random_dataset(rng, 8, 3);
  const auto obj = make_objective(data, Loss::SquaredError, Regularizer::None, 0.0);
  double expect = 0.0;
  for (double y : data->labels) expect += y * y / 8.0;
  CHECK(obj.value(DenseVector(3, 0.0)) == doctest::Approx(expect).epsilon(1e-14));

  // a . x = 0 and y = 0, so only the regularizer contributes
  auto orth = std::make_shared<SparseDataset>(parse_libsvm("0 1:2 2:1"));
  const auto l1 = make_objective(orth, Loss::SquaredError, Regularizer::L1, 1.0);
  CHECK(l1.value(DenseVector{1.0, -2.0}) == 3.0);

  const auto lg = make_objective(one_row({1.0}, 1.0), Loss::Logistic, Regularizer::None, 0.0);
  CHECK(lg.value(DenseVector{-800.0}) == doctest::Approx(800.0));
  CHECK(std::isfinite(lg.value(DenseVector{800.0})));
}

TEST_CASE("reference minimizer beats random points") {
  std::mt19937_64 rng(34);
  for (auto reg : {Regularizer::L1, Regularizer::L2}) {
    const auto obj = make_objective(random_dataset(rng, 30, 6), Loss::SquaredError, reg, 0.1);
    const auto ref = run_reference(obj, DenseVector(6, 0.0));
    REQUIRE(ref.converged);
    for (int trial = 0; trial < 100; ++trial) {
      CHECK(ref.F <= obj.value(random_vector(rng, 6)));
    }
  }
}

TEST_CASE("smoothness constants") {
  CHECK(make_objective(one_row({1.0, 1.0}, 0.0), Loss::SquaredError, Regularizer::None, 0.0)
            .L() == 4.0);
  CHECK(make_objective(one_row({2.0, 0.0}, 1.0), Loss::Logistic, Regularizer::None, 0.0)
            .L() == 1.0);

  std::mt19937_64 rng(35);
  for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
    const auto obj = make_objective(random_dataset(rng, 15, 5, 1.0, loss == Loss::Logistic),
                                    loss, Regularizer::None, 0.0);
    std::uniform_int_distribution<std::size_t> pick(0, 14);
    for (int trial = 0; trial < 300; ++trial) {
      const auto x = random_vector(rng, 5, 3.0);
      const auto y = random_vector(rng, 5, 3.0);
      const auto i = pick(rng);
      const double gdiff = dist_sq(obj.component_gradient(i, x), obj.component_gradient(i, y));
      CHECK(std::sqrt(gdiff) <= obj.L() * std::sqrt(dist_sq(x, y)) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("strong convexity and condition number come from the regularizer") {
  std::mt19937_64 rng(36);
  const auto data = random_dataset(rng, 10, 3);
  const auto ridge = make_objective(data, Loss::SquaredError, Regularizer::L2, 0.25);
  CHECK(ridge.mu() == 0.25);
  REQUIRE(ridge.kappa());
  CHECK(*ridge.kappa() == doctest::Approx(ridge.L() / 0.25));
  CHECK_FALSE(make_objective(data, Loss::SquaredError, Regularizer::L1, 0.25).kappa());
}

TEST_CASE("Bregman divergence") {
  const auto q = make_objective(one_row({1.0}, 0.0), Loss::SquaredError, Regularizer::None, 0.0);
  CHECK(q.bregman_divergence(DenseVector{1.0}, DenseVector{0.0}) == 1.0);
  CHECK(q.bregman_divergence(DenseVector{0.3}, DenseVector{0.3}) == 0.0);
}

TEST_CASE("central differences match the gradient") {
  std::mt19937_64 rng(37);
  const double eps = 1e-5;
  for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
    const auto obj = make_objective(random_dataset(rng, 12, 5, 1.0, loss == Loss::Logistic),
                                    loss, Regularizer::None, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_vector(rng, 5);
      const auto d = random_vector(rng, 5);
      DenseVector xp = x, xm = x;
      axpy(eps, d, xp);
      axpy(-eps, d, xm);
      const double fd = (obj.smooth_value(xp) - obj.smooth_value(xm)) / (2.0 * eps);
      const double exact = dot(obj.full_gradient(x), d);
      CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("co-coercivity inequalities and non-negative Bregman divergence") {
  std::mt19937_64 rng(38);
  for (auto loss : {Loss::SquaredError, Loss::Logistic}) {
    const auto obj = make_objective(random_dataset(rng, 10, 4, 1.0, loss == Loss::Logistic),
                                    loss, Regularizer::None, 0.0);
    int full_violations = 0, component_violations = 0, negative = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto x = random_vector(rng, 4, 2.0);
      const auto y = random_vector(rng, 4, 2.0);
      const double D = obj.bregman_divergence(y, x);
      const double slack = 1e-12 * (1.0 + obj.L() * dist_sq(x, y));
      if (D < -slack) ++negative;
      if (dist_sq(obj.full_gradient(x), obj.full_gradient(y)) > 2.0 * obj.L() * D + slack) {
        ++full_violations;
      }
      double comp = 0.0;
      for (std::size_t i = 0; i < obj.n(); ++i) {
        comp += dist_sq(obj.component_gradient(i, x), obj.component_gradient(i, y));
      }
      comp /= static_cast<double>(obj.n());
      if (comp > 2.0 * obj.L() * D + slack) ++component_violations;
    }
    CHECK(negative == 0);
    CHECK(full_violations == 0);
    CHECK(component_violations == 0);
  }
}
