// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Generalized Adam-type update
//   M_t = beta1 M_{t-1} + (1 - beta1) G_t
//   V_t = h_t(G_1, ..., G_t)
//   W_{t+1} = W_t - alpha M_t / sqrt(V_t + eps)
// with V_t chosen per optimizer kind. SGD and heavy-ball use V_t = 1 and
// skip eps entirely.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cvegnn/model.hpp"

namespace cvegnn {

enum class OptimizerKind { kSgd, kHeavyBall, kAdam, kAmsgrad, kAdagrad };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer_kind(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double lr = 0.01;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // applied in backward, before the optimizer
  bool adam_bias_correction = false;

  /// Defaults from the reference experiments: beta1 = 0.9 for every kind
  /// except sgd (0).
  static OptimizerConfig defaults_for(OptimizerKind kind);

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

class NonFiniteGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimizerState {
  MatrixList m;             // first moment
  MatrixList v;             // V_t; left empty for sgd / heavy-ball (V = 1)
  MatrixList v_hat;         // amsgrad: pre-max accumulator
  MatrixList grad_sq_sum;   // adagrad: running sum of G^2
  std::uint64_t t = 0;

  static OptimizerState zeros_like(const ModelParams& params, OptimizerKind kind);
};

class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const ModelParams& params);

  /// One update of `params` with gradient `grad` (weight decay already added).
  /// Throws NonFiniteGradientError before touching any state.
  void step(ModelParams& params, const Gradient& grad);

  const OptimizerConfig& config() const { return config_; }
  const OptimizerState& state() const { return state_; }
  OptimizerState& state() { return state_; }

 private:
  OptimizerConfig config_;
  OptimizerState state_;
};

}  // namespace cvegnn
