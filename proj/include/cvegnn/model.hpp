// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// GCN forward passes, loss and reverse-mode gradients.
//
// Layer k (k = 0..K-1) maps node activations H^(k) to
//   Z^(k+1) = A^(k) W^(k),  H^(k+1) = relu(Z^(k+1))  (softmax rows at k = K-1)
// where the aggregate A^(k) is P H^(k) in the exact pass and
//   P_hat^(k) (H^(k) - Hbar^(k)) + P Hbar^(k)
// in the control-variate pass, with Hbar the historical cache. Dropout, when
// enabled, multiplies A^(k) entrywise before the product with W^(k).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvegnn/graph.hpp"
#include "cvegnn/matrix.hpp"
#include "cvegnn/sampling.hpp"

namespace cvegnn {

enum class Activation { kRelu, kIdentity };

/// One matrix per weight W^(k); also the gradient and optimizer-moment type.
using MatrixList = std::vector<Matrix>;
using Gradient = MatrixList;

double squared_norm(const MatrixList& m);
double max_abs(const MatrixList& m);
double max_abs_diff(const MatrixList& a, const MatrixList& b);

struct ModelParams {
  std::vector<std::size_t> dims;  // d_0 .. d_K
  MatrixList weights;             // W^(k) is dims[k] x dims[k+1]
  Activation hidden_activation = Activation::kRelu;

  std::size_t num_layers() const { return weights.size(); }

  static ModelParams zeros(std::vector<std::size_t> dims);
  /// Glorot-uniform initialization.
  static ModelParams glorot(std::vector<std::size_t> dims, Rng& rng);

  void validate() const;
};

/// Dataset-level constants shared by every pass. `propagated` caches P X,
/// the layer-0 aggregate, which never changes because Hbar^(0) = X.
struct Problem {
  Graph graph;
  SparseMatrix propagation;
  Matrix features;
  Matrix propagated;
  LabeledSplit split;
  std::size_t num_classes = 0;

  static Problem from_dataset(Dataset data);
};

class CacheInvalidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Historical activations Hbar^(k) for k = 0..K-1. Layer 0 is the feature
/// matrix itself (not copied); the referenced features must outlive the cache.
class HistoricalCache {
 public:
  HistoricalCache() = default;
  HistoricalCache(const Matrix& features, MatrixList hidden);

  /// K: layers 0..K-1 are stored.
  std::size_t num_layers() const { return hidden_.size() + 1; }
  const Matrix& layer(std::size_t k) const;
  Matrix& hidden_layer(std::size_t k);

  bool operator==(const HistoricalCache& o) const { return features_ == o.features_ && hidden_ == o.hidden_; }

 private:
  const Matrix* features_ = nullptr;
  MatrixList hidden_;  // hidden_[k - 1] holds Hbar^(k)
};

enum class CacheInit {
  kActivated,  // Hbar^(k) = sigma(P Hbar^(k-1) W^(k-1))
  kLinear,     // Hbar^(k) = P Hbar^(k-1) W^(k-1)
};

struct LayerTrace {
  Matrix input;  // aggregate after dropout; rows follow fields[k + 1]
  Matrix mask;   // dropout multipliers; empty when dropout is off
  Matrix pre;    // Z^(k+1)
  Matrix out;    // H^(k+1)
};

struct ForwardTrace {
  MinibatchPlan plan;
  std::vector<LayerTrace> layers;

  /// Class-probability rows, aligned with plan.fields[K].
  const Matrix& probabilities() const { return layers.back().out; }
};

struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;  // required when rate > 0

  bool active() const { return rate > 0.0; }
};

/// Inverted dropout. Returns (output, multiplier mask); the mask is all ones
/// when `training` is false or `rate` is 0.
std::pair<Matrix, Matrix> apply_dropout(const Matrix& m, double rate, Rng& rng, bool training);

void softmax_rows(Matrix& z);
/// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, std::int32_t label);

/// Exact forward pass on the whole graph, no dropout. Returns probability rows
/// for `nodes` in the given order.
Matrix forward_exact(const SparseMatrix& p, const Matrix& x, const ModelParams& params,
                     std::span<const NodeId> nodes);
Matrix forward_exact(const Problem& problem, const ModelParams& params, std::span<const NodeId> nodes);
/// Pre-softmax output Z^(K) of the exact pass for every node.
Matrix forward_exact_logits(const Problem& problem, const ModelParams& params);

/// Exact forward pass recorded for backward; the loss covers `batch` draws.
ForwardTrace forward_exact_trace(const Problem& problem, const ModelParams& params, std::span<const NodeId> batch);

/// Control-variate forward pass over the plan's receptive fields.
ForwardTrace forward_cve(MinibatchPlan plan, const Problem& problem, const ModelParams& params,
                         const HistoricalCache& cache, DropoutSpec dropout = {});

/// Mean cross-entropy over the plan's draws (duplicates counted).
double minibatch_loss(const ForwardTrace& trace, std::span<const std::int32_t> labels);

/// Gradient of minibatch_loss w.r.t. every W^(k), with the cache held
/// constant, plus weight_decay * W^(k).
Gradient backward(const ForwardTrace& trace, std::span<const std::int32_t> labels, const ModelParams& params,
                  double weight_decay = 0.0);

HistoricalCache init_cache(const Problem& problem, const ModelParams& params,
                           CacheInit mode = CacheInit::kActivated);

/// Hbar^(k)[v] <- H^(k)[v] for every v in fields[k], k = 1..K-1.
void update_cache(HistoricalCache& cache, const ForwardTrace& trace);

}  // namespace cvegnn
