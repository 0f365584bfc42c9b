// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels on SBM propagation matrices.
//
//   bench_kernels --benchmark_filter=Spmm
//
// Range arguments: node count, feature width, OpenMP thread cap.

#include <benchmark/benchmark.h>

#include <random>

#include "cvegnn/kernels.hpp"
#include "cvegnn/sbm.hpp"

namespace {

using namespace cvegnn;

struct Fixture {
  SparseMatrix p;
  Matrix x;
  Matrix w;
};

Fixture make_fixture(std::size_t nodes, std::size_t width) {
  SbmConfig c;
  c.nodes = nodes;
  c.blocks = 4;
  // About 10 neighbors per node regardless of size.
  c.p_in = std::min(1.0, 30.0 / static_cast<double>(nodes));
  c.p_out = c.p_in / 10.0;
  c.dim = 4;
  const Dataset d = gen_sbm(c);
  Fixture f;
  f.p = build_normalized_propagation(d.graph);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  f.x = Matrix(nodes, width);
  for (double& v : f.x.values()) v = normal(rng);
  f.w = Matrix(width, width);
  for (double& v : f.w.values()) v = normal(rng);
  return f;
}

template <Matrix (*Kernel)(const SparseMatrix&, const Matrix&)>
void BM_Spmm(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  kernels::set_max_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.p, f.x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.p.nnz() * f.x.cols()));
}

template <Matrix (*Kernel)(const Matrix&, const Matrix&)>
void BM_Gemm(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  kernels::set_max_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.x, f.w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.x.size() * f.w.cols()));
}

void serial_args(benchmark::internal::Benchmark* b) {
  for (std::int64_t n : {2708, 20000}) b->Args({n, 64, 1});
}

void omp_args(benchmark::internal::Benchmark* b) {
  for (std::int64_t n : {2708, 20000}) {
    for (std::int64_t t : {1, 2, 4, 8}) b->Args({n, 64, t});
  }
}

BENCHMARK(BM_Spmm<kernels::serial::spmm>)->Name("Spmm/serial")->Apply(serial_args)->UseRealTime();
BENCHMARK(BM_Spmm<kernels::omp::spmm>)->Name("Spmm/omp")->Apply(omp_args)->UseRealTime();
BENCHMARK(BM_Gemm<kernels::serial::gemm>)->Name("Gemm/serial")->Apply(serial_args)->UseRealTime();
BENCHMARK(BM_Gemm<kernels::omp::gemm>)->Name("Gemm/omp")->Apply(omp_args)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
