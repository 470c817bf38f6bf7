#include "accvr/objective.hpp"

#include <algorithm>
#include <cmath>

#include "accvr/errors.hpp"

namespace accvr {
namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

}  // namespace

std::string_view to_string(Loss l) noexcept {
  switch (l) {
    case Loss::SquaredError: return "squared";
    case Loss::Logistic: return "logistic";
  }
  return "?";
}

double smoothness_constant(const SparseDataset& data, Loss loss) {
  double max_sq = 0.0;
  for (const auto& r : data.rows) max_sq = std::max(max_sq, r.norm_sq());
  return loss == Loss::SquaredError ? 2.0 * max_sq : 0.25 * max_sq;
}

CompositeObjective::CompositeObjective(std::shared_ptr<const SparseDataset> data,
                                       Loss loss, ProxSpec reg)
    : data_(std::move(data)), loss_(loss), reg_(reg) {
  if (!data_) throw ContractError("objective needs a dataset");
  data_->validate();
  reg_.validate();
  L_ = smoothness_constant(*data_, loss_);
  if (!(L_ > 0.0)) {
    throw ConfigError("dataset has only zero rows; smoothness constant is 0");
  }
}

std::optional<double> CompositeObjective::kappa() const noexcept {
  if (mu() > 0.0) return L_ / mu();
  return std::nullopt;
}

double CompositeObjective::residual_from_margin(std::size_t i,
                                                double margin) const {
  const double y = data_->labels[i];
  if (loss_ == Loss::SquaredError) return 2.0 * (margin - y);
  return -y * sigmoid(-y * margin);
}

double CompositeObjective::residual_scalar(std::size_t i,
                                           std::span<const double> x) const {
  return residual_from_margin(i, dot(data_->rows[i], x));
}

DenseVector CompositeObjective::component_gradient(
    std::size_t i, std::span<const double> x) const {
  DenseVector g(m(), 0.0);
  axpy_sparse(residual_scalar(i, x), data_->rows[i], g);
  return g;
}

double CompositeObjective::component_value(std::size_t i,
                                           std::span<const double> x) const {
  const double margin = dot(data_->rows[i], x);
  const double y = data_->labels[i];
  if (loss_ == Loss::SquaredError) {
    const double r = margin - y;
    return r * r;
  }
  return softplus(-y * margin);
}

void CompositeObjective::full_gradient_into(std::span<const double> x,
                                            std::span<double> out) const {
  if (out.size() != m()) throw StructuralError("gradient buffer has wrong length");
  std::fill(out.begin(), out.end(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n());
  for (std::size_t i = 0; i < n(); ++i) {
    axpy_sparse(inv_n * residual_scalar(i, x), data_->rows[i], out);
  }
}

DenseVector CompositeObjective::full_gradient(std::span<const double> x) const {
  DenseVector g(m());
  full_gradient_into(x, g);
  return g;
}

double CompositeObjective::smooth_value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n(); ++i) s += component_value(i, x);
  return s / static_cast<double>(n());
}

double CompositeObjective::value(std::span<const double> x) const {
  return smooth_value(x) + reg_.value(x);
}

double CompositeObjective::bregman_divergence(std::span<const double> y,
                                              std::span<const double> x) const {
  if (y.size() != m() || x.size() != m()) {
    throw StructuralError("bregman_divergence: point has wrong length");
  }
  if (loss_ == Loss::SquaredError) {
    // f is quadratic, so D_f(y, x) = (1/n) sum_i (a_i^T (y - x))^2 exactly.
    DenseVector d(m());
    for (std::size_t j = 0; j < m(); ++j) d[j] = y[j] - x[j];
    double s = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
      const double t = dot(data_->rows[i], d);
      s += t * t;
    }
    return s / static_cast<double>(n());
  }
  const DenseVector gx = full_gradient(x);
  double lin = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) lin += gx[j] * (y[j] - x[j]);
  return smooth_value(y) - smooth_value(x) - lin;
}

}  // namespace accvr
