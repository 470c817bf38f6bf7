#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace accvr {

/// Raised when a sparse row references a column outside the vector it is
/// applied to, or otherwise breaks the sorted/unique index invariant.
class StructuralError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed LIBSVM input. `line()` is 1-based; 0 means "whole input".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid experiment/schedule configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (negative prox step, wrong
/// estimator state, b > n, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Exact-law enumeration would exceed the outcome cap.
class EnumerationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace accvr
