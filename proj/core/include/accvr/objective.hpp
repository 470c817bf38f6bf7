#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "accvr/data.hpp"
#include "accvr/linalg.hpp"
#include "accvr/prox.hpp"

namespace accvr {

enum class Loss { SquaredError, Logistic };

std::string_view to_string(Loss l) noexcept;

/// F(x) = (1/n) sum_i f_i(x) + g(x) over a shared, immutable dataset.
///
/// Squared error: f_i(x) = (a_i^T x - y_i)^2 (no 1/2 factor).
/// Logistic:      f_i(x) = log(1 + exp(-y_i a_i^T x)).
///
/// Every component gradient is a multiple of a_i, so the estimators store one
/// scalar per sample (see residual_scalar). L is the max component smoothness
/// constant; mu is the strong convexity of g.
class CompositeObjective {
 public:
  CompositeObjective(std::shared_ptr<const SparseDataset> data, Loss loss,
                     ProxSpec reg);

  const SparseDataset& data() const noexcept { return *data_; }
  std::shared_ptr<const SparseDataset> data_ptr() const noexcept { return data_; }
  Loss loss() const noexcept { return loss_; }
  const ProxSpec& reg() const noexcept { return reg_; }
  std::size_t n() const noexcept { return data_->n(); }
  std::size_t m() const noexcept { return data_->m(); }
  double L() const noexcept { return L_; }
  double mu() const noexcept { return reg_.mu(); }
  /// L / mu when mu > 0.
  std::optional<double> kappa() const noexcept;

  const SparseRow& row(std::size_t i) const { return data_->rows[i]; }

  /// Scalar c with grad f_i(x) = c * a_i.
  double residual_scalar(std::size_t i, std::span<const double> x) const;
  /// Same as residual_scalar but from a precomputed a_i^T x.
  double residual_from_margin(std::size_t i, double margin) const;
  DenseVector component_gradient(std::size_t i, std::span<const double> x) const;
  double component_value(std::size_t i, std::span<const double> x) const;

  DenseVector full_gradient(std::span<const double> x) const;
  /// Writes grad f(x) into `out` (length m).
  void full_gradient_into(std::span<const double> x, std::span<double> out) const;

  /// f(x) (smooth part only).
  double smooth_value(std::span<const double> x) const;
  /// F(x) = f(x) + g(x).
  double value(std::span<const double> x) const;

  /// D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>.
  double bregman_divergence(std::span<const double> y,
                            std::span<const double> x) const;

 private:
  std::shared_ptr<const SparseDataset> data_;
  Loss loss_;
  ProxSpec reg_;
  double L_ = 0.0;
};

/// max_i L_i for the given loss: 2||a_i||^2 (squared) or ||a_i||^2 / 4.
double smoothness_constant(const SparseDataset& data, Loss loss);

}  // namespace accvr
