// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvegnn/matrix.hpp"

namespace cvegnn {

/// Undirected simple graph. Neighbor lists are sorted, symmetric, free of
/// duplicates and self-loops.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list: orientation is ignored, duplicates
  /// and self-loops are dropped. Throws std::out_of_range on a bad endpoint.
  static Graph from_edges(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const;
  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], degree(v)};
  }
  bool has_edge(NodeId u, NodeId v) const;

  /// Each undirected edge once, as (u, v) with u < v, in increasing order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbors_;
};

/// Labels for the labeled subset plus disjoint train/val/test index lists.
struct LabeledSplit {
  static constexpr std::int32_t kUnlabeled = -1;

  std::vector<std::int32_t> labels;  // per node; kUnlabeled when unknown
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  std::size_t num_classes() const;
  /// Throws std::invalid_argument on overlapping splits or unlabeled split members.
  void validate() const;

  bool operator==(const LabeledSplit&) const = default;
};

struct Dataset {
  Graph graph;
  Matrix features;
  LabeledSplit split;
};

/// P = D^{-1/2} (A + I) D^{-1/2}.
SparseMatrix build_normalized_propagation(const Graph& g);

class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::filesystem::path& file, std::size_t line, const std::string& what);
  DatasetError(const std::filesystem::path& file, const std::string& what);

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_ = 0;
};

/// Reads `edges.tsv`, `features.bin` (or `features.csv`), `labels.tsv` and
/// `train.txt`/`val.txt`/`test.txt` from `dir`.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the layout read by load_dataset (binary features).
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

}  // namespace cvegnn
