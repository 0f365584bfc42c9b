// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Gradient oracles and Monte-Carlo probes of the sampled gradient.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvegnn/model.hpp"
#include "cvegnn/sampling.hpp"
#include "cvegnn/trainer.hpp"

namespace cvegnn {

struct ExactGradient {
  double loss = 0.0;
  Gradient gradient;
};

/// Loss and gradient of the full-propagation objective on `nodes` (no
/// sampling, no dropout). Weight decay adds lambda/2 ||W||^2 to the loss.
ExactGradient exact_gradient(const Problem& problem, const ModelParams& params, std::span<const NodeId> nodes,
                             double weight_decay = 0.0);

using LossFunction = std::function<double(const ModelParams&)>;

/// Central differences (f(w + h e_j) - f(w - h e_j)) / 2h for every weight.
Gradient finite_difference_gradient(const LossFunction& loss, const ModelParams& params, double h);

struct GradCheckResult {
  double max_rel_error = 0.0;  // max over coordinates of |a - n| / max(|a|, |n|, floor)
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
};

/// Compares backward() against central differences of the control-variate
/// minibatch loss with the plan and cache held fixed and dropout off.
GradCheckResult gradient_check(const Problem& problem, const ModelParams& params, const HistoricalCache& cache,
                               const MinibatchPlan& plan, double h, double weight_decay = 0.0,
                               double floor = 1e-7);

struct BiasProbeConfig {
  SamplerConfig sampler;
  std::size_t samples = 1000;  // m
  /// Use the whole training set, in order, as the minibatch of every draw so
  /// that neighbor sampling is the only source of randomness.
  bool full_batch = false;
  std::uint64_t seed = 0;
  double alpha = 0.0;  // recorded only
};

struct BiasEstimate {
  double alpha = 0.0;
  std::size_t samples = 0;
  double estimate = 0.0;       // ||mean(G) - grad F(W)||_inf
  double std_error = 0.0;      // standard error of the coordinate attaining the max
  double max_std_error = 0.0;  // largest per-coordinate standard error
  Gradient std_errors;         // per coordinate
};

/// Holds W and the cache fixed and averages `samples` independent sampled
/// gradients (no dropout, no weight decay) against the exact gradient on the
/// training set.
BiasEstimate bias_probe(const Problem& problem, const ModelParams& params, const HistoricalCache& cache,
                        const BiasProbeConfig& config);

struct RateProbeConfig {
  TrainConfig train;          // optimizer.lr is replaced by eta / sqrt(T)
  double eta = 0.1;
  std::vector<std::uint64_t> horizons;  // T grid, strictly increasing
  std::size_t max_evaluations = 50;     // thinning of exact gradient evaluations per T
  std::optional<ModelParams> initial;   // W_1 for every T; seeded init when unset
};

struct RatePoint {
  std::uint64_t horizon = 0;  // T
  double alpha = 0.0;
  double statistic = 0.0;  // mean of ||grad F(W_t)||^2 over the evaluated t in 1..T
  double std_error = 0.0;
  std::size_t evaluations = 0;
};

struct RateTrace {
  std::vector<RatePoint> points;
};

/// For each T runs a fresh training of T - 1 updates (iterates W_1..W_T) with
/// alpha = eta / sqrt(T), evaluating the exact squared gradient norm on an
/// evenly thinned subset of iterates. Frozen layers are left out of the norm.
RateTrace rate_probe(const Problem& problem, const RateProbeConfig& config);

void write_probe_csv_header(std::ostream& out);
void write_probe_csv(std::ostream& out, const BiasEstimate& estimate);
void write_probe_csv(std::ostream& out, const std::string& probe, const RateTrace& trace);

}  // namespace cvegnn
