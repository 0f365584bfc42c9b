// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "cvegnn/kernels.hpp"

namespace cvegnn::kernels {

namespace detail {

namespace {
std::string shape(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }
}  // namespace

void check_spmm(const SparseMatrix& a, const Matrix& b) {
  if (a.cols != b.rows()) {
    throw DimensionError("spmm: " + shape(a.rows, a.cols) + " * " + shape(b.rows(), b.cols()));
  }
}

void check_rows(const SparseMatrix& a, std::span<const NodeId> rows) {
  for (NodeId r : rows) {
    if (r >= a.rows) throw DimensionError("spmm_rows: row " + std::to_string(r) + " out of range");
  }
}

void check_gemm(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("gemm: " + shape(a.rows(), a.cols()) + " * " + shape(b.rows(), b.cols()));
  }
}

void check_gemm_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("gemm_tn: " + shape(a.rows(), a.cols()) + "^T * " + shape(b.rows(), b.cols()));
  }
}

void check_gemm_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("gemm_nt: " + shape(a.rows(), a.cols()) + " * " + shape(b.rows(), b.cols()) + "^T");
  }
}

}  // namespace detail

namespace serial {

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  detail::check_spmm(a, b);
  Matrix c(a.rows, b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* out = c.data() + i * n;
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const double v = a.values[p];
      const double* in = b.data() + static_cast<std::size_t>(a.col_idx[p]) * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += v * in[j];
    }
  }
  return c;
}

Matrix spmm_rows(const SparseMatrix& a, const Matrix& b, std::span<const NodeId> rows) {
  detail::check_spmm(a, b);
  detail::check_rows(a, rows);
  Matrix c(rows.size(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    double* out = c.data() + i * n;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const double v = a.values[p];
      const double* in = b.data() + static_cast<std::size_t>(a.col_idx[p]) * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += v * in[j];
    }
  }
  return c;
}

Matrix gemm(const Matrix& a, const Matrix& b) {
  detail::check_gemm(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(m, n);
  const double* __restrict ad = a.data();
  const double* __restrict bd = b.data();
  double* __restrict cd = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict out = cd + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double v = ad[i * k + l];
      if (v == 0.0) continue;
      const double* __restrict in = bd + l * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += v * in[j];
    }
  }
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  detail::check_gemm_tn(a, b);
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  Matrix c(m, n);
  const double* __restrict ad = a.data();
  const double* __restrict bd = b.data();
  double* __restrict cd = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict out = cd + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double v = ad[l * m + i];
      if (v == 0.0) continue;
      const double* __restrict in = bd + l * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += v * in[j];
    }
  }
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  detail::check_gemm_nt(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      c.data()[i * n + j] = s;
    }
  }
  return c;
}

}  // namespace serial
}  // namespace cvegnn::kernels
