#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tcoh {

// Dense n x p observation matrix, column-major (each column contiguous).
// Rows are observations i = 0..n-1, columns are variables. User-facing
// reports index columns 1-based (statistical convention); all in-memory
// interfaces are 0-based.
struct Matrix {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::vector<double> data;  // size n*p, column j starts at data[j*n]

  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols)
      : n(rows), p(cols), data(static_cast<std::size_t>(rows * cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  double* col(std::int64_t j) { return data.data() + j * n; }
  const double* col(std::int64_t j) const { return data.data() + j * n; }
  double& at(std::int64_t i, std::int64_t j) { return data[j * n + i]; }
  double at(std::int64_t i, std::int64_t j) const { return data[j * n + i]; }
};

// Abstract provider of column blocks. The coherence engine pulls packets of
// columns through this interface, so the same scan runs against an in-memory
// matrix, a file, or a generator that materializes columns on demand.
class BlockSource {
 public:
  virtual ~BlockSource() = default;
  virtual std::int64_t rows() const = 0;
  virtual std::int64_t cols() const = 0;
  // Fill dst with columns [col0, col0+count) over all rows, column-major with
  // leading dimension ld (>= rows()). Implementations must be thread-safe and
  // deterministic: the bytes written depend only on (col0, count).
  virtual void fetch(std::int64_t col0, std::int64_t count, double* dst,
                     std::int64_t ld) const = 0;
};

class MatrixSource final : public BlockSource {
 public:
  explicit MatrixSource(const Matrix& m) : m_(&m) {}
  std::int64_t rows() const override { return m_->n; }
  std::int64_t cols() const override { return m_->p; }
  void fetch(std::int64_t col0, std::int64_t count, double* dst,
             std::int64_t ld) const override {
    if (col0 < 0 || count < 0 || col0 + count > m_->p)
      throw std::invalid_argument("MatrixSource::fetch: column range out of bounds");
    for (std::int64_t c = 0; c < count; ++c) {
      const double* src = m_->col(col0 + c);
      double* out = dst + c * ld;
      for (std::int64_t i = 0; i < m_->n; ++i) out[i] = src[i];
    }
  }

 private:
  const Matrix* m_;
};

}  // namespace tcoh
