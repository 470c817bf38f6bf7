#include "accvr/prox.hpp"

#include <algorithm>
#include <cmath>

#include "accvr/errors.hpp"

namespace accvr {

std::string_view to_string(Regularizer r) noexcept {
  switch (r) {
    case Regularizer::None: return "none";
    case Regularizer::L1: return "l1";
    case Regularizer::L2: return "l2";
  }
  return "?";
}

void ProxSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractError("regularization weight must be finite and >= 0");
  }
}

double ProxSpec::value(std::span<const double> x) const {
  switch (kind) {
    case Regularizer::None: return 0.0;
    case Regularizer::L1: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return lambda * s;
    }
    case Regularizer::L2: return 0.5 * lambda * norm_sq(x);
  }
  return 0.0;
}

void prox_inplace(const ProxSpec& spec, std::span<double> v, double t) {
  if (!(t >= 0.0)) throw ContractError("prox step t must be >= 0");
  if (t == 0.0) return;
  const double thr = t * spec.lambda;
  switch (spec.kind) {
    case Regularizer::None: return;
    case Regularizer::L1:
      for (double& x : v) {
        const double mag = std::abs(x) - thr;
        // Ties |x| == thr land on 0.
        x = mag > 0.0 ? std::copysign(mag, x) : 0.0;
      }
      return;
    case Regularizer::L2: {
      const double shrink = 1.0 / (1.0 + thr);
      for (double& x : v) x *= shrink;
      return;
    }
  }
}

DenseVector prox(const ProxSpec& spec, std::span<const double> v, double t) {
  DenseVector out(v.begin(), v.end());
  prox_inplace(spec, out, t);
  return out;
}

double prox_subgradient_check(const ProxSpec& spec, std::span<const double> v,
                              double t, std::span<const double> z) {
  if (v.size() != z.size()) throw StructuralError("prox check length mismatch");
  double worst = 0.0;
  if (t == 0.0) return max_abs_diff(v, z);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double s = (v[j] - z[j]) / t;
    double viol = 0.0;
    switch (spec.kind) {
      case Regularizer::None: viol = std::abs(s); break;
      case Regularizer::L2: viol = std::abs(s - spec.lambda * z[j]); break;
      case Regularizer::L1:
        if (z[j] == 0.0) {
          viol = std::max(0.0, std::abs(s) - spec.lambda);
        } else {
          viol = std::abs(s - std::copysign(spec.lambda, z[j]));
        }
        break;
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace accvr
