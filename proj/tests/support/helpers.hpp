#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <vector>

#include "accvr/data.hpp"
#include "accvr/estimators.hpp"
#include "accvr/objective.hpp"

namespace testing_support {

using accvr::DenseVector;

/// Random row-sparse dataset with entries in [-1, 1]. Labels are +-1 when
/// `binary`, otherwise standard normal.
std::shared_ptr<const accvr::SparseDataset> random_dataset(
    std::mt19937_64& rng, std::size_t n, std::size_t m, double density = 1.0,
    bool binary = false);

accvr::CompositeObjective make_objective(
    std::shared_ptr<const accvr::SparseDataset> data, accvr::Loss loss,
    accvr::Regularizer reg, double lambda);

DenseVector random_vector(std::mt19937_64& rng, std::size_t m, double scale = 1.0);

Eigen::MatrixXd to_dense(const accvr::SparseDataset& data);
Eigen::VectorXd to_eigen(const DenseVector& v);

/// Minimizer of (1/n)||Ax - y||^2 + (lambda/2)||x||^2 from the normal
/// equations (2/n A^T A + lambda I) x = (2/n) A^T y.
DenseVector ridge_solution(const accvr::SparseDataset& data, double lambda);

/// Gradient of the smooth part computed densely, independent of the library.
DenseVector dense_gradient(const accvr::SparseDataset& data, accvr::Loss loss,
                           const DenseVector& x);

/// Estimator state after init at a random point followed by `steps` random
/// estimate calls at random points. The state's prev_x/prev_estimate (when
/// present) describe the last step.
accvr::EstimatorState random_state(const accvr::EstimatorOptions& opts,
                                   const accvr::CompositeObjective& obj,
                                   std::mt19937_64& rng, std::size_t steps);

/// Left and right sides of
///   sum_{k<=T} sum_{l<=k} (1-rho)^(k-l) sigma_l <= (1/rho) sum_k sigma_k.
struct GeometricSumCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};
GeometricSumCheck geometric_sum_check(const std::vector<double>& sigma, double rho);

}  // namespace testing_support
