// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace cvegnn {

std::string to_string(SamplingMode m) {
  return m == SamplingMode::kWithoutReplacement ? "without-replacement" : "with-replacement-dedup";
}

SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "without-replacement") return SamplingMode::kWithoutReplacement;
  if (s == "with-replacement-dedup") return SamplingMode::kWithReplacementDedup;
  throw std::invalid_argument("unknown sampling mode '" + s +
                              "' (expected without-replacement or with-replacement-dedup)");
}

void SamplerConfig::validate(std::size_t train_size) const {
  if (neighbors < 1) throw std::invalid_argument("neighbors per layer must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (batch_size > train_size) {
    throw std::invalid_argument("batch size " + std::to_string(batch_size) + " exceeds train set size " +
                                std::to_string(train_size));
  }
}

std::vector<NodeId> sample_minibatch(std::span<const NodeId> train, std::size_t batch_size, Rng& rng) {
  if (train.empty()) throw std::invalid_argument("sample_minibatch: empty train set");
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::vector<NodeId> batch(batch_size);
  for (auto& b : batch) b = train[pick(rng)];
  return batch;
}

std::vector<std::uint32_t> sample_pool_positions(std::size_t pool_size, std::size_t budget, SamplingMode mode,
                                                 Rng& rng) {
  if (budget == 0) throw std::invalid_argument("neighbor budget must be >= 1");
  if (pool_size == 0) return {};
  std::vector<std::uint32_t> out;
  // A pool no larger than the budget is kept whole in both modes.
  if (budget >= pool_size) {
    out.resize(pool_size);
    std::iota(out.begin(), out.end(), 0u);
    return out;
  }
  if (mode == SamplingMode::kWithoutReplacement) {
    // Floyd's algorithm: a uniformly random `budget`-subset in O(budget) draws.
    out.reserve(budget);
    for (std::size_t j = pool_size - budget; j < pool_size; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      const auto t = static_cast<std::uint32_t>(pick(rng));
      if (std::find(out.begin(), out.end(), t) == out.end()) {
        out.push_back(t);
      } else {
        out.push_back(static_cast<std::uint32_t>(j));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
  out.reserve(budget);
  for (std::size_t d = 0; d < budget; ++d) out.push_back(static_cast<std::uint32_t>(pick(rng)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NodeId> sample_neighbors(const Graph& g, NodeId v, std::size_t budget, SamplingMode mode, Rng& rng) {
  // Same ordering as row v of P: neighbors and v merged ascending.
  auto nbrs = g.neighbors(v);
  std::vector<NodeId> pool;
  pool.reserve(nbrs.size() + 1);
  auto split = std::lower_bound(nbrs.begin(), nbrs.end(), v);
  pool.insert(pool.end(), nbrs.begin(), split);
  pool.push_back(v);
  pool.insert(pool.end(), split, nbrs.end());

  std::vector<NodeId> out;
  for (auto pos : sample_pool_positions(pool.size(), budget, mode, rng)) out.push_back(pool[pos]);
  return out;
}

namespace {

// Shared plan construction; `choose(pool_size)` returns sorted positions
// within a row of P and `scale(pool_size, realized)` the row multiplier.
template <typename Choose, typename Scale>
MinibatchPlan assemble_plan(const Graph& g, const SparseMatrix& p, std::span<const NodeId> minibatch,
                            std::size_t num_layers, Choose&& choose, Scale&& scale) {
  if (p.rows != g.num_nodes() || p.cols != g.num_nodes()) {
    throw DimensionError("build_plan: propagation matrix does not match graph");
  }
  if (num_layers == 0) throw std::invalid_argument("build_plan: at least one layer required");

  MinibatchPlan plan;
  plan.batch.assign(minibatch.begin(), minibatch.end());
  plan.fields.resize(num_layers + 1);
  plan.sampled.resize(num_layers);

  // Local positions are shared across layers because every field extends the
  // next deeper one.
  constexpr std::uint32_t kAbsent = ~std::uint32_t{0};
  std::vector<std::uint32_t> local(g.num_nodes(), kAbsent);

  auto& top = plan.fields[num_layers];
  plan.batch_rows.reserve(minibatch.size());
  for (NodeId v : minibatch) {
    if (v >= g.num_nodes()) throw std::out_of_range("build_plan: minibatch node out of range");
    if (local[v] == kAbsent) {
      local[v] = static_cast<std::uint32_t>(top.size());
      top.push_back(v);
    }
    plan.batch_rows.push_back(local[v]);
  }

  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t k = num_layers; k-- > 0;) {
    const auto& upper = plan.fields[k + 1];
    auto& field = plan.fields[k];
    field = upper;
    SparseMatrix& s = plan.sampled[k];
    s.rows = upper.size();
    s.row_ptr.assign(upper.size() + 1, 0);
    for (std::size_t i = 0; i < upper.size(); ++i) {
      const NodeId v = upper[i];
      const std::size_t start = p.row_ptr[v];
      const std::size_t pool = p.row_length(v);
      const auto chosen = choose(pool);
      const double factor = scale(pool, chosen.size());
      entries.clear();
      for (auto pos : chosen) {
        const NodeId u = p.col_idx[start + pos];
        if (local[u] == kAbsent) {
          local[u] = static_cast<std::uint32_t>(field.size());
          field.push_back(u);
        }
        entries.emplace_back(local[u], factor * p.values[start + pos]);
      }
      std::sort(entries.begin(), entries.end());
      for (auto [c, val] : entries) {
        s.col_idx.push_back(c);
        s.values.push_back(val);
      }
      s.row_ptr[i + 1] = s.col_idx.size();
    }
  }
  for (std::size_t k = 0; k < num_layers; ++k) plan.sampled[k].cols = plan.fields[k].size();
  return plan;
}

}  // namespace

MinibatchPlan build_plan(const Graph& g, const SparseMatrix& p, std::span<const NodeId> minibatch,
                         std::size_t num_layers, const SamplerConfig& config, Rng& rng) {
  if (config.neighbors < 1) throw std::invalid_argument("build_plan: neighbors must be >= 1");
  auto choose = [&](std::size_t pool) { return sample_pool_positions(pool, config.neighbors, config.mode, rng); };
  auto scale = [&](std::size_t pool, std::size_t realized) {
    if (config.scaling == SampleScaling::kLiteral) {
      return static_cast<double>(pool - 1) / static_cast<double>(config.neighbors);
    }
    return static_cast<double>(pool) / static_cast<double>(realized);
  };
  return assemble_plan(g, p, minibatch, num_layers, choose, scale);
}

MinibatchPlan build_full_plan(const Graph& g, const SparseMatrix& p, std::span<const NodeId> minibatch,
                              std::size_t num_layers) {
  auto choose = [](std::size_t pool) {
    std::vector<std::uint32_t> all(pool);
    std::iota(all.begin(), all.end(), 0u);
    return all;
  };
  auto scale = [](std::size_t, std::size_t) { return 1.0; };
  return assemble_plan(g, p, minibatch, num_layers, choose, scale);
}

void validate_plan(const MinibatchPlan& plan) {
  const std::size_t layers = plan.sampled.size();
  if (plan.fields.size() != layers + 1) throw std::invalid_argument("plan: field count != layers + 1");
  const auto& top = plan.fields[layers];
  if (plan.batch_rows.size() != plan.batch.size()) throw std::invalid_argument("plan: batch_rows size mismatch");
  for (std::size_t i = 0; i < plan.batch.size(); ++i) {
    if (plan.batch_rows[i] >= top.size() || top[plan.batch_rows[i]] != plan.batch[i]) {
      throw std::invalid_argument("plan: batch_rows does not locate the draw in the top field");
    }
  }
  for (std::size_t k = 0; k < layers; ++k) {
    const auto& upper = plan.fields[k + 1];
    const auto& field = plan.fields[k];
    if (field.size() < upper.size() || !std::equal(upper.begin(), upper.end(), field.begin())) {
      throw std::invalid_argument("plan: field " + std::to_string(k) + " does not extend field " +
                                  std::to_string(k + 1));
    }
    std::vector<NodeId> sorted = field;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("plan: duplicate node in field " + std::to_string(k));
    }
    const auto& s = plan.sampled[k];
    if (s.rows != upper.size() || s.cols != field.size()) {
      throw std::invalid_argument("plan: sampled matrix " + std::to_string(k) + " has wrong shape");
    }
    s.validate();
  }
}

}  // namespace cvegnn
