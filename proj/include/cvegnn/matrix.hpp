// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvegnn {

using NodeId = std::uint32_t;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Gather the listed rows of `m` into a new matrix.
Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows);

double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& m);

/// Compressed sparse row matrix with sorted column indices in each row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<NodeId> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }
  std::size_t row_length(std::size_t r) const { return row_ptr[r + 1] - row_ptr[r]; }
  std::span<const NodeId> row_cols(std::size_t r) const {
    return {col_idx.data() + row_ptr[r], row_length(r)};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values.data() + row_ptr[r], row_length(r)};
  }

  /// Entry lookup by binary search; zero when absent.
  double at(std::size_t r, std::size_t c) const;

  static SparseMatrix identity(std::size_t n);
  Matrix to_dense() const;
  SparseMatrix transposed() const;
  /// Throws std::invalid_argument when the structure is malformed.
  void validate() const;

  bool operator==(const SparseMatrix&) const = default;
};

}  // namespace cvegnn
