#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "accvr/linalg.hpp"

namespace accvr {

/// Row-sparse design matrix with one real label per row.
///
/// Invariants: rows.size() == labels.size() == n() >= 1, dim >= 1, and every
/// row index is < dim. Immutable once built and safe to share across runs.
struct SparseDataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  std::size_t dim = 0;

  std::size_t n() const noexcept { return rows.size(); }
  std::size_t m() const noexcept { return dim; }
  void validate() const;
};

/// Parses `<label> <idx>:<val> ...` lines with 1-based indices. Blank lines
/// and `#` comments are skipped. Throws ParseError with the offending line.
SparseDataset parse_libsvm(std::istream& in);
SparseDataset parse_libsvm(std::string_view text);
SparseDataset load_libsvm(const std::string& path);

/// Writes LIBSVM text with round-trip float precision.
void write_libsvm(std::ostream& out, const SparseDataset& data);
void save_libsvm(const std::string& path, const SparseDataset& data);

/// Raises the feature dimension (e.g. to match a companion file). Throws
/// ConfigError if `m` is smaller than the current dimension.
SparseDataset with_dimension(SparseDataset data, std::size_t m);

/// Divides each feature column by its maximum absolute value so every stored
/// value lies in [-1, 1]. All-zero columns are left untouched.
SparseDataset rescale_features(SparseDataset data);

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t m = 10;
  std::uint64_t seed = 0;
  double noise = 0.0;
  /// Scale of the hidden regressor; 0 gives an all-zero truth vector.
  double truth_scale = 1.0;
  /// Fraction of entries kept per row (1 = dense rows).
  double density = 1.0;
  /// When > 0, rows are drawn from a rank-`latent_rank` factor model plus
  /// `latent_noise` isotropic noise, which produces correlated, badly
  /// conditioned features. 0 draws independent U[-1, 1] entries.
  std::size_t latent_rank = 0;
  double latent_noise = 0.05;
};

struct SyntheticData {
  SparseDataset dataset;
  DenseVector truth;
};

/// Deterministic given `spec` (mt19937_64 seeded with `spec.seed`). Stored
/// entries lie in [-1, 1]; labels are a_i^T truth + noise * N(0, 1).
SyntheticData make_synthetic_with_truth(const SyntheticSpec& spec);
SparseDataset make_synthetic(std::size_t n, std::size_t m, std::uint64_t seed,
                             double noise);

}  // namespace accvr
