// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Dense and sparse-dense products used by the forward and backward passes.
//
// Every kernel exists twice: a plain serial reference in `kernels::serial`
// and an OpenMP version in `kernels::omp`. Both partition work by output row
// and accumulate each output entry in the same order, so the two agree
// bitwise for any thread count. The unqualified `kernels::` entry points
// dispatch to the OpenMP versions.

#pragma once

#include <span>

#include "cvegnn/matrix.hpp"

namespace cvegnn::kernels {

/// Caps the OpenMP team size used by the dispatching kernels (>= 1).
void set_max_threads(int n);
int max_threads();
/// Reads CVE_GNN_THREADS; leaves the current setting alone when unset or invalid.
void configure_threads_from_env();

namespace serial {
Matrix spmm(const SparseMatrix& a, const Matrix& b);
/// Rows `rows` of a*b, in the listed order.
Matrix spmm_rows(const SparseMatrix& a, const Matrix& b, std::span<const NodeId> rows);
Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix gemm_nt(const Matrix& a, const Matrix& b);  // a * b^T
}  // namespace serial

namespace omp {
Matrix spmm(const SparseMatrix& a, const Matrix& b);
Matrix spmm_rows(const SparseMatrix& a, const Matrix& b, std::span<const NodeId> rows);
Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
}  // namespace omp

inline Matrix spmm(const SparseMatrix& a, const Matrix& b) { return omp::spmm(a, b); }
inline Matrix spmm_rows(const SparseMatrix& a, const Matrix& b, std::span<const NodeId> rows) {
  return omp::spmm_rows(a, b, rows);
}
inline Matrix gemm(const Matrix& a, const Matrix& b) { return omp::gemm(a, b); }
inline Matrix gemm_tn(const Matrix& a, const Matrix& b) { return omp::gemm_tn(a, b); }
inline Matrix gemm_nt(const Matrix& a, const Matrix& b) { return omp::gemm_nt(a, b); }

namespace detail {
void check_spmm(const SparseMatrix& a, const Matrix& b);
void check_rows(const SparseMatrix& a, std::span<const NodeId> rows);
void check_gemm(const Matrix& a, const Matrix& b);
void check_gemm_tn(const Matrix& a, const Matrix& b);
void check_gemm_nt(const Matrix& a, const Matrix& b);
}  // namespace detail

}  // namespace cvegnn::kernels
