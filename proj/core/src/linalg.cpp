#include "accvr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "accvr/errors.hpp"

namespace accvr {
namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw StructuralError("vector length mismatch: " + std::to_string(a) +
                          " vs " + std::to_string(b));
  }
}

void check_row_fits(const SparseRow& row, std::size_t dim) {
  if (row.indices.size() != row.values.size()) {
    throw StructuralError("sparse row has mismatched index/value lengths");
  }
  // Indices are sorted, so the last one bounds them all.
  if (!row.indices.empty() && row.indices.back() >= dim) {
    throw StructuralError("sparse row index " +
                          std::to_string(row.indices.back()) +
                          " out of range for dimension " + std::to_string(dim));
  }
}

}  // namespace

void SparseRow::validate(std::size_t dim) const {
  check_row_fits(*this, dim);
  for (std::size_t t = 1; t < indices.size(); ++t) {
    if (indices[t] <= indices[t - 1]) {
      throw StructuralError("sparse row indices are not strictly increasing");
    }
  }
}

double SparseRow::norm_sq() const noexcept {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

SparseRow dense_to_row(std::span<const double> x) {
  SparseRow row;
  row.indices.resize(x.size());
  row.values.assign(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    row.indices[j] = static_cast<std::uint32_t>(j);
  }
  return row;
}

double dot(const SparseRow& row, std::span<const double> x) {
  check_row_fits(row, x.size());
  double s = 0.0;
  const std::size_t nnz = row.indices.size();
  for (std::size_t t = 0; t < nnz; ++t) s += row.values[t] * x[row.indices[t]];
  return s;
}

void axpy_sparse(double alpha, const SparseRow& row, std::span<double> x) {
  check_row_fits(row, x.size());
  if (alpha == 0.0) return;
  const std::size_t nnz = row.indices.size();
  for (std::size_t t = 0; t < nnz; ++t) x[row.indices[t]] += alpha * row.values[t];
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double dist_sq(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out) {
  check_same_size(x.size(), y.size());
  check_same_size(x.size(), out.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = a * x[j] + b * y[j];
}

bool all_finite(std::span<const double> x) noexcept {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace accvr
