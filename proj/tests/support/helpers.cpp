#include "support/helpers.hpp"

#include <cmath>

namespace testing_support {

std::shared_ptr<const accvr::SparseDataset> random_dataset(std::mt19937_64& rng,
                                                           std::size_t n, std::size_t m,
                                                           double density, bool binary) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> normal;
  auto data = std::make_shared<accvr::SparseDataset>();
  data->dim = m;
  for (std::size_t i = 0; i < n; ++i) {
    accvr::SparseRow row;
    for (std::size_t j = 0; j < m; ++j) {
      if (density >= 1.0 || coin(rng) < density) {
        row.indices.push_back(static_cast<std::uint32_t>(j));
        row.values.push_back(unif(rng));
      }
    }
    if (row.empty()) {
      row.indices.push_back(static_cast<std::uint32_t>(i % m));
      row.values.push_back(0.5);
    }
    data->rows.push_back(std::move(row));
    data->labels.push_back(binary ? (coin(rng) < 0.5 ? -1.0 : 1.0) : normal(rng));
  }
  return data;
}

accvr::CompositeObjective make_objective(std::shared_ptr<const accvr::SparseDataset> data,
                                         accvr::Loss loss, accvr::Regularizer reg,
                                         double lambda) {
  return accvr::CompositeObjective(std::move(data), loss, accvr::ProxSpec{reg, lambda});
}

DenseVector random_vector(std::mt19937_64& rng, std::size_t m, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  DenseVector v(m);
  for (auto& x : v) x = normal(rng);
  return v;
}

Eigen::MatrixXd to_dense(const accvr::SparseDataset& data) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.n()),
                                            static_cast<Eigen::Index>(data.m()));
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& r = data.rows[i];
    for (std::size_t t = 0; t < r.nnz(); ++t) {
      A(static_cast<Eigen::Index>(i), r.indices[t]) = r.values[t];
    }
  }
  return A;
}

Eigen::VectorXd to_eigen(const DenseVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

DenseVector ridge_solution(const accvr::SparseDataset& data, double lambda) {
  const Eigen::MatrixXd A = to_dense(data);
  const Eigen::VectorXd y = to_eigen(data.labels);
  const double n = static_cast<double>(data.n());
  Eigen::MatrixXd H = (2.0 / n) * A.transpose() * A;
  H.diagonal().array() += lambda;
  const Eigen::VectorXd x = H.ldlt().solve((2.0 / n) * A.transpose() * y);
  return DenseVector(x.data(), x.data() + x.size());
}

DenseVector dense_gradient(const accvr::SparseDataset& data, accvr::Loss loss,
                           const DenseVector& x) {
  const Eigen::MatrixXd A = to_dense(data);
  const Eigen::VectorXd y = to_eigen(data.labels);
  const Eigen::VectorXd margin = A * to_eigen(x);
  Eigen::VectorXd r(margin.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    if (loss == accvr::Loss::SquaredError) {
      r(i) = 2.0 * (margin(i) - y(i));
    } else {
      r(i) = -y(i) / (1.0 + std::exp(y(i) * margin(i)));
    }
  }
  const Eigen::VectorXd g = A.transpose() * r / static_cast<double>(data.n());
  return DenseVector(g.data(), g.data() + g.size());
}

accvr::EstimatorState random_state(const accvr::EstimatorOptions& opts,
                                   const accvr::CompositeObjective& obj,
                                   std::mt19937_64& rng, std::size_t steps) {
  auto init = accvr::init_estimator(opts, obj, random_vector(rng, obj.m()));
  accvr::EstimatorState state = std::move(init.state);
  DenseVector out(obj.m());
  for (std::size_t s = 0; s < steps; ++s) {
    const auto x = random_vector(rng, obj.m());
    const auto draw = accvr::draw_sample(rng, state, obj.n(), opts.b);
    accvr::estimate(state, obj, x, draw, out);
  }
  return state;
}

GeometricSumCheck geometric_sum_check(const std::vector<double>& sigma, double rho) {
  GeometricSumCheck out;
  double running = 0.0;  // sum_{l<=k} (1-rho)^(k-l) sigma_l
  for (double s : sigma) {
    running = (1.0 - rho) * running + s;
    out.lhs += running;
    out.rhs += s;
  }
  out.rhs /= rho;
  return out;
}

}  // namespace testing_support
