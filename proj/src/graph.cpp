// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cvegnn {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> adj(num_nodes);
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") has an endpoint outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  Graph g;
  g.offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.offsets_[v + 1] = g.offsets_[v] + list.size();
  }
  g.neighbors_.reserve(g.offsets_.back());
  for (auto& list : adj) g.neighbors_.insert(g.neighbors_.end(), list.begin(), list.end());
  return g;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_nodes(); ++v) best = std::max(best, degree(static_cast<NodeId>(v)));
  return best;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::size_t LabeledSplit::num_classes() const {
  std::int32_t best = -1;
  for (auto l : labels) best = std::max(best, l);
  return static_cast<std::size_t>(best + 1);
}

void LabeledSplit::validate() const {
  std::unordered_set<NodeId> seen;
  auto check = [&](const std::vector<NodeId>& part, const char* name) {
    for (NodeId v : part) {
      if (v >= labels.size()) {
        throw std::invalid_argument(std::string(name) + " split: node " + std::to_string(v) + " out of range");
      }
      if (labels[v] == kUnlabeled) {
        throw std::invalid_argument(std::string(name) + " split: node " + std::to_string(v) + " has no label");
      }
      if (!seen.insert(v).second) {
        throw std::invalid_argument(std::string(name) + " split: node " + std::to_string(v) +
                                    " appears in more than one split");
      }
    }
  };
  check(train, "train");
  check(val, "val");
  check(test, "test");
}

SparseMatrix build_normalized_propagation(const Graph& g) {
  const std::size_t n = g.num_nodes();

  SparseMatrix p;
  p.rows = p.cols = n;
  p.row_ptr.assign(n + 1, 0);
  p.col_idx.reserve(2 * g.num_edges() + n);
  p.values.reserve(2 * g.num_edges() + n);
  for (NodeId v = 0; v < n; ++v) {
    bool self_done = false;
    auto emit = [&](NodeId u) {
      p.col_idx.push_back(u);
      const double dv = static_cast<double>(g.degree(v) + 1);
      const double du = static_cast<double>(g.degree(u) + 1);
      p.values.push_back(1.0 / std::sqrt(dv * du));
    };
    for (NodeId u : g.neighbors(v)) {
      if (!self_done && u > v) {
        emit(v);
        self_done = true;
      }
      emit(u);
    }
    if (!self_done) emit(v);
    p.row_ptr[v + 1] = p.col_idx.size();
  }
  return p;
}

}  // namespace cvegnn
