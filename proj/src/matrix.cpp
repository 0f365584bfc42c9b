// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace cvegnn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: data size " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) throw DimensionError("gather_rows: row index out of range");
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(), [](double v) { return std::isfinite(v); });
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols_r = row_cols(r);
  auto it = std::lower_bound(cols_r.begin(), cols_r.end(), static_cast<NodeId>(c));
  if (it == cols_r.end() || *it != c) return 0.0;
  return values[row_ptr[r] + static_cast<std::size_t>(it - cols_r.begin())];
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ptr[i + 1] = i + 1;
    m.col_idx[i] = static_cast<NodeId>(i);
  }
  return m;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) d(r, col_idx[p]) = values[p];
  }
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (NodeId c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Rows visited in increasing order keep each transposed row sorted.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      std::size_t dst = cursor[col_idx[p]]++;
      t.col_idx[dst] = static_cast<NodeId>(r);
      t.values[dst] = values[p];
    }
  }
  return t;
}

void SparseMatrix::validate() const {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col_idx.size() ||
      col_idx.size() != values.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw std::invalid_argument("SparseMatrix: row_ptr not monotone");
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col_idx[p] >= cols) throw std::invalid_argument("SparseMatrix: column index out of range");
      if (p > row_ptr[r] && col_idx[p - 1] >= col_idx[p]) {
        throw std::invalid_argument("SparseMatrix: columns not strictly increasing in row " +
                                    std::to_string(r));
      }
    }
  }
}

}  // namespace cvegnn
