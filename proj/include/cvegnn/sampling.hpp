// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Minibatch and per-layer neighbor sampling.
//
// The neighbor pool of node v is N_v plus v itself, which is exactly the
// support of row v of the normalized propagation matrix. A sampled row keeps
// the chosen entries of P scaled by |pool| / s_v, where s_v is the number of
// distinct nodes actually drawn, so that the sampled row is an unbiased
// estimate of the full row in without-replacement mode.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cvegnn/graph.hpp"
#include "cvegnn/matrix.hpp"

namespace cvegnn {

using Rng = std::mt19937_64;

enum class SamplingMode {
  kWithoutReplacement,     // exactly min(D, |pool|) distinct nodes
  kWithReplacementDedup,   // D uniform draws, duplicates dropped; pools of size <= D kept whole
};

enum class SampleScaling {
  kPoolOverRealized,  // |N_v| + 1 over the realized sample count
  kLiteral,           // |N_v| over the nominal budget D
};

std::string to_string(SamplingMode m);
SamplingMode parse_sampling_mode(const std::string& s);

struct SamplerConfig {
  std::size_t neighbors = 2;  // D, shared by every layer
  std::size_t batch_size = 1;
  SamplingMode mode = SamplingMode::kWithoutReplacement;
  SampleScaling scaling = SampleScaling::kPoolOverRealized;
  std::uint64_t seed = 0;

  void validate(std::size_t train_size) const;
};

/// Per-iteration sampling result for a K-layer model.
///
/// `fields[k]` is the receptive field r^(k), k = 0..K. Each field starts with
/// the nodes of `fields[k + 1]` in the same order, so a node keeps its local
/// row index in every deeper field. `sampled[k]` (k = 0..K-1) is the rescaled
/// stochastic propagation matrix in local coordinates: row i is node
/// fields[k + 1][i] and column j is node fields[k][j].
struct MinibatchPlan {
  std::vector<std::vector<NodeId>> fields;
  std::vector<SparseMatrix> sampled;
  std::vector<NodeId> batch;             // raw draws, duplicates kept
  std::vector<std::uint32_t> batch_rows;  // local row of each draw in fields[K]

  std::size_t num_layers() const { return sampled.size(); }
};

/// `batch_size` uniform draws with replacement from `train`.
std::vector<NodeId> sample_minibatch(std::span<const NodeId> train, std::size_t batch_size, Rng& rng);

/// Positions drawn from a pool of `pool_size` candidates, sorted ascending.
/// Returns the full pool without touching `rng` when it cannot be exceeded.
std::vector<std::uint32_t> sample_pool_positions(std::size_t pool_size, std::size_t budget, SamplingMode mode,
                                                 Rng& rng);

/// Sampled subset of N_v plus v, sorted ascending.
std::vector<NodeId> sample_neighbors(const Graph& g, NodeId v, std::size_t budget, SamplingMode mode, Rng& rng);

/// Builds receptive fields and sampled propagation matrices for `num_layers`
/// layers. `p` must be build_normalized_propagation(g).
MinibatchPlan build_plan(const Graph& g, const SparseMatrix& p, std::span<const NodeId> minibatch,
                         std::size_t num_layers, const SamplerConfig& config, Rng& rng);

/// Plan with every neighbor kept (scale factor 1); consumes no randomness.
MinibatchPlan build_full_plan(const Graph& g, const SparseMatrix& p, std::span<const NodeId> minibatch,
                              std::size_t num_layers);

/// Checks the structural invariants listed on MinibatchPlan.
void validate_plan(const MinibatchPlan& plan);

}  // namespace cvegnn
