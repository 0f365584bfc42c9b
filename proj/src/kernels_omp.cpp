// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "cvegnn/kernels.hpp"

namespace cvegnn::kernels {

namespace {
std::atomic<int> g_max_threads{0};  // 0: OpenMP default

int team_size() {
  const int cap = g_max_threads.load(std::memory_order_relaxed);
  return cap > 0 ? cap : omp_get_max_threads();
}

// Below this many scalar multiply-adds a single thread is faster.
constexpr std::size_t kParallelWork = 1 << 14;

int threads_for(std::size_t work) { return work < kParallelWork ? 1 : team_size(); }
}  // namespace

void set_max_threads(int n) { g_max_threads.store(std::max(1, n), std::memory_order_relaxed); }

int max_threads() { return team_size(); }

void configure_threads_from_env() {
  const char* env = std::getenv("CVE_GNN_THREADS");
  if (env == nullptr) return;
  try {
    const int n = std::stoi(env);
    if (n >= 1) set_max_threads(n);
  } catch (const std::exception&) {
  }
}

namespace omp {

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  detail::check_spmm(a, b);
  Matrix c(a.rows, b.cols());
  const std::size_t n = b.cols();
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads_for(a.nnz() * n))
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  const auto count = static_cast<std::ptrdiff_t>(rows.size());
  const std::size_t work = rows.size() * n * 8;
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads_for(work))
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(threads_for(m * k * n))
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(threads_for(m * k * n))
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(threads_for(m * k * n))
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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

}  // namespace omp
}  // namespace cvegnn::kernels
