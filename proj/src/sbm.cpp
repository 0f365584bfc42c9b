// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cvegnn/sampling.hpp"

namespace cvegnn {

void SbmConfig::validate() const {
  if (nodes < 1) throw std::invalid_argument("gen-sbm: nodes must be >= 1");
  if (blocks < 1 || blocks > nodes) throw std::invalid_argument("gen-sbm: blocks must lie in [1, nodes]");
  if (dim < blocks) throw std::invalid_argument("gen-sbm: dim must be >= blocks");
  if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0)) {
    throw std::invalid_argument("gen-sbm: probabilities must satisfy 0 <= p-out <= p-in <= 1");
  }
}

std::vector<std::int32_t> sbm_blocks(std::size_t nodes, std::size_t blocks) {
  std::vector<std::int32_t> out;
  out.reserve(nodes);
  const std::size_t base = nodes / blocks;
  const std::size_t extra = nodes % blocks;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    out.insert(out.end(), size, static_cast<std::int32_t>(b));
  }
  return out;
}

namespace {
// Uniform in [0, 1) from the top 53 bits.
double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
}  // namespace

Dataset gen_sbm(const SbmConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t n = config.nodes;
  const auto block = sbm_blocks(n, config.blocks);

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = block[u] == block[v] ? config.p_in : config.p_out;
      if (unit(rng) < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  Dataset data;
  data.graph = Graph::from_edges(n, edges);
  data.features = Matrix(n, config.dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double offset = 2.0 * std::sqrt(2.0);
  for (std::size_t v = 0; v < n; ++v) {
    auto row = data.features.row(v);
    for (double& x : row) x = normal(rng);
    row[static_cast<std::size_t>(block[v])] += offset;
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  auto& split = data.split;
  split.labels = block;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  for (auto* s : {&split.train, &split.val, &split.test}) std::sort(s->begin(), s->end());
  return data;
}

}  // namespace cvegnn
