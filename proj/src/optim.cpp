// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cvegnn/kernels.hpp"

namespace cvegnn {

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kHeavyBall: return "heavy-ball";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kAmsgrad: return "amsgrad";
    case OptimizerKind::kAdagrad: return "adagrad";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& s) {
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kHeavyBall, OptimizerKind::kAdam, OptimizerKind::kAmsgrad,
                 OptimizerKind::kAdagrad}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd, heavy-ball, adam, amsgrad or adagrad)");
}

OptimizerConfig OptimizerConfig::defaults_for(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  c.beta1 = kind == OptimizerKind::kSgd ? 0.0 : 0.9;
  return c;
}

void OptimizerConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  if (weight_decay < 0.0) throw std::invalid_argument("weight-decay must be >= 0");
  if (kind == OptimizerKind::kSgd && beta1 != 0.0) throw std::invalid_argument("sgd requires beta1 = 0");
  if (adam_bias_correction && kind != OptimizerKind::kAdam) {
    throw std::invalid_argument("adam-bias-correction only applies to adam");
  }
}

namespace {
MatrixList zeros_like(const ModelParams& params) {
  MatrixList out;
  for (const auto& w : params.weights) out.emplace_back(w.rows(), w.cols());
  return out;
}
}  // namespace

OptimizerState OptimizerState::zeros_like(const ModelParams& params, OptimizerKind kind) {
  OptimizerState s;
  s.m = cvegnn::zeros_like(params);
  switch (kind) {
    case OptimizerKind::kAdam:
      s.v = cvegnn::zeros_like(params);
      break;
    case OptimizerKind::kAmsgrad:
      s.v = cvegnn::zeros_like(params);
      s.v_hat = cvegnn::zeros_like(params);
      break;
    case OptimizerKind::kAdagrad:
      s.v = cvegnn::zeros_like(params);
      s.grad_sq_sum = cvegnn::zeros_like(params);
      break;
    default:
      break;
  }
  return s;
}

Optimizer::Optimizer(OptimizerConfig config, const ModelParams& params)
    : config_(config), state_(OptimizerState::zeros_like(params, config.kind)) {
  config_.validate();
}

void Optimizer::step(ModelParams& params, const Gradient& grad) {
  if (grad.size() != params.weights.size()) throw DimensionError("Optimizer::step: layer count mismatch");
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (grad[k].rows() != params.weights[k].rows() || grad[k].cols() != params.weights[k].cols()) {
      throw DimensionError("Optimizer::step: gradient shape mismatch at layer " + std::to_string(k));
    }
    const auto g = grad[k].values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        std::ostringstream msg;
        msg << "non-finite gradient entry " << g[i] << " at layer " << k << ", index " << i << " (step "
            << state_.t + 1 << ")";
        throw NonFiniteGradientError(msg.str());
      }
    }
  }

  ++state_.t;
  const double t = static_cast<double>(state_.t);
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double lr = config_.lr;
  const double eps = config_.eps;
  const auto kind = config_.kind;
  double m_scale = 1.0, v_scale = 1.0;
  if (kind == OptimizerKind::kAdam && config_.adam_bias_correction) {
    m_scale = 1.0 / (1.0 - std::pow(b1, t));
    v_scale = 1.0 / (1.0 - std::pow(b2, t));
  }

  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double* g = grad[k].data();
    double* w = params.weights[k].data();
    double* m = state_.m[k].data();
    double* v = state_.v.empty() ? nullptr : state_.v[k].data();
    double* vh = state_.v_hat.empty() ? nullptr : state_.v_hat[k].data();
    double* sq = state_.grad_sq_sum.empty() ? nullptr : state_.grad_sq_sum[k].data();
    const auto count = static_cast<std::ptrdiff_t>(grad[k].size());

#pragma omp parallel for schedule(static) if (count > 4096) num_threads(kernels::max_threads())
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const double gi = g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      switch (kind) {
        case OptimizerKind::kSgd:
        case OptimizerKind::kHeavyBall:
          w[i] -= lr * m[i];
          break;
        case OptimizerKind::kAdam:
          v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
          w[i] -= lr * (m[i] * m_scale) / std::sqrt(v[i] * v_scale + eps);
          break;
        case OptimizerKind::kAmsgrad:
          vh[i] = b2 * vh[i] + (1.0 - b2) * gi * gi;
          v[i] = std::max(v[i], vh[i]);
          w[i] -= lr * m[i] / std::sqrt(v[i] + eps);
          break;
        case OptimizerKind::kAdagrad:
          sq[i] += gi * gi;
          v[i] = sq[i] / t;
          w[i] -= lr * m[i] / std::sqrt(v[i] + eps);
          break;
      }
    }
  }
}

}  // namespace cvegnn
