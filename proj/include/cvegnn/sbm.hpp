// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "cvegnn/graph.hpp"

namespace cvegnn {

/// Stochastic block model with Gaussian class-mean features.
struct SbmConfig {
  std::size_t nodes = 200;
  std::size_t blocks = 2;
  double p_in = 0.2;
  double p_out = 0.01;
  std::size_t dim = 8;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SbmConfig&) const = default;
};

/// Block of node v: the first nodes % blocks blocks hold one extra node and
/// blocks are contiguous ranges of ids.
std::vector<std::int32_t> sbm_blocks(std::size_t nodes, std::size_t blocks);

/// Edges are independent Bernoulli(p_in) within a block and Bernoulli(p_out)
/// across blocks. Features are N(mu_b, I) with mu_b = 2 sqrt(2) e_b, so any
/// two class means are 4 apart. Split is 60/20/20 over a shuffled index.
Dataset gen_sbm(const SbmConfig& config);

}  // namespace cvegnn
