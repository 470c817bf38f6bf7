#pragma once

#include <span>
#include <string_view>

#include "accvr/linalg.hpp"

namespace accvr {

enum class Regularizer { None, L1, L2 };

std::string_view to_string(Regularizer r) noexcept;

/// g(x) = lambda * ||x||_1 (L1), (lambda / 2) * ||x||^2 (L2), or 0.
struct ProxSpec {
  Regularizer kind = Regularizer::None;
  double lambda = 0.0;

  /// Strong convexity modulus of g: lambda for L2, 0 otherwise.
  double mu() const noexcept { return kind == Regularizer::L2 ? lambda : 0.0; }
  double value(std::span<const double> x) const;
  void validate() const;
};

/// argmin_x { 0.5 ||x - v||^2 + t g(x) }. Throws ContractError for t < 0.
DenseVector prox(const ProxSpec& spec, std::span<const double> v, double t);
/// In-place form: `v` is overwritten with prox_{t g}(v).
void prox_inplace(const ProxSpec& spec, std::span<double> v, double t);

/// Largest elementwise violation of (v - z) / t in the subdifferential of g
/// at z. Returns 0 (up to rounding) exactly when z = prox(spec, v, t). For
/// t == 0 the inclusion degenerates to z == v and the result is max|v - z|.
double prox_subgradient_check(const ProxSpec& spec, std::span<const double> v,
                              double t, std::span<const double> z);

}  // namespace accvr
