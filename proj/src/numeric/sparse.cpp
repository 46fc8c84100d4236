#include "msmr/numeric/sparse.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "msmr/error.hpp"

namespace msmr::numeric {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  bool have_last = false;
  std::size_t last_row = 0, last_col = 0;
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols)
      throw ShapeError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    if (have_last && t.row == last_row && t.col == last_col) {
      val_.back() += t.value;
      continue;
    }
    col_.push_back(t.col);
    val_.push_back(t.value);
    row_ptr_[t.row + 1] += 1;
    have_last = true;
    last_row = t.row;
    last_col = t.col;
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return CsrMatrix(n, n, std::move(t));
}

std::span<const std::size_t> CsrMatrix::row_cols(std::size_t r) const {
  return std::span<const std::size_t>(col_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
}

std::span<const double> CsrMatrix::row_values(std::size_t r) const {
  return std::span<const double>(val_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
}

double CsrMatrix::coeff(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto vals = row_values(r);
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == c) return vals[i];
  return 0.0;
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nonzeros());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) out.push_back({r, col_[i], val_[i]});
  return out;
}

CsrMatrix CsrMatrix::transposed() const {
  auto t = triplets();
  for (auto& e : t) std::swap(e.row, e.col);
  return CsrMatrix(cols_, rows_, std::move(t));
}

CsrMatrix CsrMatrix::multiply(const CsrMatrix& other) const {
  if (cols_ != other.rows_)
    throw ShapeError("sparse product " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " * " + std::to_string(other.rows_) + "x" + std::to_string(other.cols_));
  std::vector<Triplet> out;
  for (std::size_t r = 0; r < rows_; ++r) {
    std::map<std::size_t, double> acc;
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      const std::size_t k = col_[i];
      for (std::size_t j = other.row_ptr_[k]; j < other.row_ptr_[k + 1]; ++j)
        acc[other.col_[j]] += val_[i] * other.val_[j];
    }
    for (const auto& [c, v] : acc) out.push_back({r, c, v});
  }
  return CsrMatrix(rows_, other.cols_, std::move(out));
}

void CsrMatrix::apply(std::span<const double> dense, std::size_t k, std::span<double> out) const {
  if (dense.size() != cols_ * k || out.size() != rows_ * k)
    throw ShapeError("sparse apply: operand sizes do not match " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      const double w = val_[i];
      const double* src = dense.data() + col_[i] * k;
      double* dst = out.data() + r * k;
      for (std::size_t c = 0; c < k; ++c) dst[c] += w * src[c];
    }
}

void CsrMatrix::apply_transposed_add(std::span<const double> dense, std::size_t k,
                                     std::span<double> out) const {
  if (dense.size() != rows_ * k || out.size() != cols_ * k)
    throw ShapeError("sparse transposed apply: operand sizes do not match");
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      const double w = val_[i];
      const double* src = dense.data() + r * k;
      double* dst = out.data() + col_[i] * k;
      for (std::size_t c = 0; c < k; ++c) dst[c] += w * src[c];
    }
}

}  // namespace msmr::numeric
