#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msmr::numeric {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Used for the mesh resampling operators.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Duplicate (row, col) entries are summed; explicit zeros are kept.
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  static CsrMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return col_.size(); }

  /// Column indices and values of one row.
  std::span<const std::size_t> row_cols(std::size_t r) const;
  std::span<const double> row_values(std::size_t r) const;
  double coeff(std::size_t r, std::size_t c) const;

  std::vector<Triplet> triplets() const;
  CsrMatrix transposed() const;
  /// this * other
  CsrMatrix multiply(const CsrMatrix& other) const;

  /// out[m x k] = this[m x n] * dense[n x k], row-major dense buffers.
  void apply(std::span<const double> dense, std::size_t k, std::span<double> out) const;
  /// out[n x k] += this^T * dense[m x k]
  void apply_transposed_add(std::span<const double> dense, std::size_t k,
                            std::span<double> out) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

}  // namespace msmr::numeric
