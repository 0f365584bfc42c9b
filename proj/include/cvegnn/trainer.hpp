// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "cvegnn/model.hpp"
#include "cvegnn/optim.hpp"
#include "cvegnn/sampling.hpp"

namespace cvegnn {

enum class OutputIterate { kLast, kUniformRandom };

std::string to_string(OutputIterate o);
OutputIterate parse_output_iterate(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 50;
  std::size_t neighbors = 2;
  std::size_t hidden_dim = 32;
  std::size_t layers = 2;
  double dropout = 0.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  /// Iterations between evaluations; 0 evaluates once per epoch.
  std::size_t eval_every = 0;
  OutputIterate output_iterate = OutputIterate::kLast;
  SamplingMode sampling_mode = SamplingMode::kWithoutReplacement;
  SampleScaling scaling = SampleScaling::kPoolOverRealized;
  CacheInit cache_init = CacheInit::kActivated;
  Activation hidden_activation = Activation::kRelu;
  /// When false the wall_s column is written as 0 so that reruns are
  /// byte-identical.
  bool record_wall_time = true;
  /// Layers whose weights never change (test instrumentation).
  std::vector<std::size_t> frozen_layers;

  void validate() const;
  SamplerConfig sampler() const;
  bool operator==(const TrainConfig&) const = default;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(std::uint64_t iteration, double loss);
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

struct IterationStats {
  double loss = 0.0;
  double grad_sq_norm = 0.0;
};

/// State of one run of the control-variate training loop: parameters,
/// historical cache, optimizer moments and the sampling stream.
/// The problem must outlive the session.
class TrainingSession {
 public:
  TrainingSession(const Problem& problem, TrainConfig config);
  TrainingSession(const Problem& problem, TrainConfig config, ModelParams initial);

  /// minibatch -> plan -> forward -> loss -> backward -> optimizer -> cache.
  IterationStats step();

  std::uint64_t iteration() const { return iteration_; }
  std::size_t iterations_per_epoch() const;
  const TrainConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }
  const HistoricalCache& cache() const { return cache_; }
  const Optimizer& optimizer() const { return optimizer_; }
  const Problem& problem() const { return problem_; }

 private:
  const Problem& problem_;
  TrainConfig config_;
  ModelParams params_;
  HistoricalCache cache_;
  Optimizer optimizer_;
  Rng rng_;
  std::uint64_t iteration_ = 0;
};

struct SplitAccuracy {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

struct EvalRecord {
  std::uint64_t epoch = 0;
  std::uint64_t iter = 0;
  SplitAccuracy acc;
  double loss = 0.0;          // mean minibatch loss since the previous record
  double grad_sq_norm = 0.0;  // mean ||G_t||^2 since the previous record
  double wall_s = 0.0;
};

struct RunMetrics {
  std::vector<EvalRecord> records;

  double max_test_accuracy() const;
};

struct TrainResult {
  ModelParams params;
  RunMetrics metrics;
  std::uint64_t selected_iterate = 0;  // number of updates applied to `params`
};

/// Runs ceil(|train| / batch) iterations per epoch for `epochs` epochs. The
/// first record is the initial model, with exact full-batch loss and
/// squared gradient norm in place of minibatch statistics.
TrainResult train(const Problem& problem, const TrainConfig& config);

/// Fraction of `nodes` whose argmax class (lowest index on ties) matches.
double evaluate(const SparseMatrix& p, const Matrix& x, const ModelParams& params, std::span<const NodeId> nodes,
                std::span<const std::int32_t> labels);
double accuracy(const Matrix& scores, std::span<const NodeId> nodes, std::span<const std::int32_t> labels);
/// One exact forward pass scored on every split (NaN for an empty split).
SplitAccuracy evaluate_splits(const Problem& problem, const ModelParams& params);

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics);

}  // namespace cvegnn
