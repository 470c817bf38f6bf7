#include "accvr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "accvr/errors.hpp"

namespace accvr {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// from_chars for doubles is available in libstdc++ 11.
bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::uint64_t& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void parse_line(std::string_view line, std::size_t lineno, SparseDataset& data,
                std::size_t& max_index) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) {
    line = line.substr(0, hash);
  }
  const auto tokens = split_tokens(line);
  if (tokens.empty()) return;

  double label = 0.0;
  if (!parse_double(tokens[0], label)) {
    throw ParseError(lineno, "non-numeric label '" + std::string(tokens[0]) + "'");
  }

  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(tokens.size() - 1);
  for (std::size_t t = 1; t < tokens.size(); ++t) {
    const auto tok = tokens[t];
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(lineno, "malformed token '" + std::string(tok) +
                                   "' (expected idx:val)");
    }
    std::uint64_t idx = 0;
    double val = 0.0;
    if (!parse_index(tok.substr(0, colon), idx) || idx == 0 ||
        idx > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError(lineno, "bad feature index in '" + std::string(tok) + "'");
    }
    if (!parse_double(tok.substr(colon + 1), val)) {
      throw ParseError(lineno, "bad feature value in '" + std::string(tok) + "'");
    }
    entries.emplace_back(static_cast<std::uint32_t>(idx - 1), val);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseRow row;
  row.indices.reserve(entries.size());
  row.values.reserve(entries.size());
  for (std::size_t t = 0; t < entries.size(); ++t) {
    if (t > 0 && entries[t].first == entries[t - 1].first) {
      throw ParseError(lineno, "duplicate feature index " +
                                   std::to_string(entries[t].first + 1));
    }
    row.indices.push_back(entries[t].first);
    row.values.push_back(entries[t].second);
    max_index = std::max<std::size_t>(max_index, entries[t].first + 1);
  }
  data.rows.push_back(std::move(row));
  data.labels.push_back(label);
}

}  // namespace

void SparseDataset::validate() const {
  if (rows.empty()) throw StructuralError("dataset has no samples");
  if (dim == 0) throw StructuralError("dataset has zero feature dimension");
  if (rows.size() != labels.size()) {
    throw StructuralError("dataset rows/labels length mismatch");
  }
  for (const auto& r : rows) r.validate(dim);
}

SparseDataset parse_libsvm(std::istream& in) {
  SparseDataset data;
  std::size_t max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    parse_line(line, lineno, data, max_index);
  }
  if (data.rows.empty()) throw ParseError(0, "empty dataset");
  if (max_index == 0) throw ParseError(0, "dataset has no features");
  data.dim = max_index;
  return data;
}

SparseDataset parse_libsvm(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in);
}

SparseDataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open dataset file '" + path + "'");
  return parse_libsvm(in);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.labels[i];
    const auto& row = data.rows[i];
    for (std::size_t t = 0; t < row.nnz(); ++t) {
      out << ' ' << (row.indices[t] + 1) << ':' << row.values[t];
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void save_libsvm(const std::string& path, const SparseDataset& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file '" + path + "'");
  write_libsvm(out, data);
}

SparseDataset with_dimension(SparseDataset data, std::size_t m) {
  if (m < data.dim) {
    throw ConfigError("requested dimension " + std::to_string(m) +
                      " is smaller than the observed dimension " +
                      std::to_string(data.dim));
  }
  data.dim = m;
  return data;
}

SparseDataset rescale_features(SparseDataset data) {
  std::vector<double> colmax(data.dim, 0.0);
  for (const auto& row : data.rows) {
    for (std::size_t t = 0; t < row.nnz(); ++t) {
      auto& cm = colmax[row.indices[t]];
      cm = std::max(cm, std::abs(row.values[t]));
    }
  }
  for (auto& row : data.rows) {
    for (std::size_t t = 0; t < row.nnz(); ++t) {
      const double cm = colmax[row.indices[t]];
      if (cm > 0.0) row.values[t] /= cm;
    }
  }
  return data;
}

SyntheticData make_synthetic_with_truth(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.m == 0) {
    throw ConfigError("synthetic dataset needs n >= 1 and m >= 1");
  }
  if (!(spec.density > 0.0 && spec.density <= 1.0)) {
    throw ConfigError("synthetic density must lie in (0, 1]");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticData out;
  out.truth.resize(spec.m);
  for (auto& v : out.truth) v = spec.truth_scale * unif(rng);

  std::vector<double> loadings;
  if (spec.latent_rank > 0) {
    loadings.resize(spec.latent_rank * spec.m);
    for (auto& v : loadings) v = unif(rng);
  }

  std::vector<std::vector<double>> dense(spec.n, std::vector<double>(spec.m));
  std::vector<double> factors(spec.latent_rank);
  double global_max = 0.0;
  for (auto& row : dense) {
    if (spec.latent_rank == 0) {
      for (auto& v : row) v = unif(rng);
    } else {
      for (auto& f : factors) f = unif(rng);
      for (std::size_t j = 0; j < spec.m; ++j) {
        double v = spec.latent_noise * unif(rng);
        for (std::size_t r = 0; r < spec.latent_rank; ++r) {
          v += factors[r] * loadings[r * spec.m + j];
        }
        row[j] = v;
      }
    }
    if (spec.density < 1.0) {
      for (auto& v : row) {
        if (coin(rng) >= spec.density) v = 0.0;
      }
    }
    for (double v : row) global_max = std::max(global_max, std::abs(v));
  }
  // Factor-model rows can leave [-1, 1]; one global scale keeps correlations.
  const double scale = global_max > 1.0 ? 1.0 / global_max : 1.0;

  auto& ds = out.dataset;
  ds.dim = spec.m;
  ds.rows.reserve(spec.n);
  ds.labels.reserve(spec.n);
  for (const auto& dr : dense) {
    SparseRow row;
    for (std::size_t j = 0; j < spec.m; ++j) {
      if (dr[j] != 0.0) {
        row.indices.push_back(static_cast<std::uint32_t>(j));
        row.values.push_back(dr[j] * scale);
      }
    }
    const double clean = dot(row, out.truth);
    const double label = spec.noise == 0.0 ? clean : clean + spec.noise * gauss(rng);
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  return out;
}

SparseDataset make_synthetic(std::size_t n, std::size_t m, std::uint64_t seed,
                             double noise) {
  SyntheticSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  spec.noise = noise;
  return make_synthetic_with_truth(spec).dataset;
}

}  // namespace accvr
