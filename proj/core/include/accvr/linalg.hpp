#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace accvr {

using DenseVector = std::vector<double>;

/// One row of a row-sparse design matrix. Indices are strictly increasing;
/// zeros are never materialized.
struct SparseRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
  /// Throws StructuralError unless indices are sorted, unique and < dim.
  void validate(std::size_t dim) const;
  /// Squared Euclidean norm of the stored values.
  double norm_sq() const noexcept;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

/// Densify `x` into a row that stores every coordinate (including zeros).
SparseRow dense_to_row(std::span<const double> x);

double dot(const SparseRow& row, std::span<const double> x);
void axpy_sparse(double alpha, const SparseRow& row, std::span<double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> x);
double dist_sq(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// out = a * x + b * y (out may alias x or y)
void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out);
bool all_finite(std::span<const double> x) noexcept;

}  // namespace accvr
