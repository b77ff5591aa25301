#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tcoh {

// Invalid arguments throw std::invalid_argument with a message naming the
// violated constraint. The two error conditions below carry extra context
// that callers are expected to inspect, so they get their own types.

// A column whose (centered) norm is zero: the correlation coefficient is
// undefined there, and we refuse to emit NaN. `column` is 1-based.
class DegenerateColumnError : public std::runtime_error {
 public:
  DegenerateColumnError(std::int64_t column, const std::string& what)
      : std::runtime_error(what), column_(column) {}
  std::int64_t column() const { return column_; }

 private:
  std::int64_t column_;
};

// Cholesky factorization hit a non-positive pivot: the covariance matrix is
// not positive definite. `minor_index` is the 1-based order of the offending
// leading principal minor.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::int64_t minor_index, const std::string& what)
      : std::runtime_error(what), minor_index_(minor_index) {}
  std::int64_t minor_index() const { return minor_index_; }

 private:
  std::int64_t minor_index_;
};

}  // namespace tcoh
