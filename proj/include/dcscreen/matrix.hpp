#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dcscreen {

/// Dense column-major matrix of doubles. Columns are contiguous, so a
/// per-feature pass reads one `col()` span.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Copies the listed columns, in order, into a new matrix.
  Matrix select_cols(std::span<const std::size_t> cols) const {
    Matrix out(rows_, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto src = col(cols[k]);
      auto dst = out.col(k);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
  }

  /// Builds an n x 1 matrix from a vector.
  static Matrix column(std::vector<double> values) {
    Matrix m;
    m.rows_ = values.size();
    m.cols_ = 1;
    m.data_ = std::move(values);
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace dcscreen
