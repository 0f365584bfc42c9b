// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cvegnn/diagnostics.hpp"

namespace cvegnn {

std::string to_string(OutputIterate o) { return o == OutputIterate::kLast ? "last" : "uniform-random"; }

OutputIterate parse_output_iterate(const std::string& s) {
  if (s == "last") return OutputIterate::kLast;
  if (s == "uniform-random") return OutputIterate::kUniformRandom;
  throw std::invalid_argument("unknown output-iterate policy '" + s + "' (expected last or uniform-random)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch-size must be >= 1");
  if (neighbors < 1) throw std::invalid_argument("neighbors must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("hidden-dim must be >= 1");
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
  for (auto k : frozen_layers) {
    if (k >= layers) throw std::invalid_argument("frozen layer index out of range");
  }
  optimizer.validate();
}

SamplerConfig TrainConfig::sampler() const {
  SamplerConfig s;
  s.neighbors = neighbors;
  s.batch_size = batch_size;
  s.mode = sampling_mode;
  s.scaling = scaling;
  s.seed = seed;
  return s;
}

NonFiniteLossError::NonFiniteLossError(std::uint64_t iteration, double loss)
    : std::runtime_error("non-finite minibatch loss " + std::to_string(loss) + " at iteration " +
                         std::to_string(iteration)),
      iteration_(iteration) {}

namespace {

// Independent streams derived from the run seed.
enum Stream : std::uint64_t { kInit = 1, kSampling = 2, kOutputIterate = 3 };

Rng stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

std::vector<std::size_t> layer_dims(const Problem& problem, const TrainConfig& config) {
  std::vector<std::size_t> dims{problem.features.cols()};
  for (std::size_t k = 1; k < config.layers; ++k) dims.push_back(config.hidden_dim);
  dims.push_back(problem.num_classes);
  return dims;
}

ModelParams initial_params(const Problem& problem, const TrainConfig& config) {
  Rng rng = stream_rng(config.seed, kInit);
  ModelParams p = ModelParams::glorot(layer_dims(problem, config), rng);
  p.hidden_activation = config.hidden_activation;
  return p;
}

}  // namespace

TrainingSession::TrainingSession(const Problem& problem, TrainConfig config)
    : TrainingSession(problem, config, initial_params(problem, config)) {}

TrainingSession::TrainingSession(const Problem& problem, TrainConfig config, ModelParams initial)
    : problem_(problem),
      config_(std::move(config)),
      params_(std::move(initial)),
      optimizer_(config_.optimizer, params_),
      rng_(stream_rng(config_.seed, kSampling)) {
  config_.validate();
  config_.sampler().validate(problem_.split.train.size());
  if (params_.num_layers() != config_.layers) throw DimensionError("initial params do not match layer count");
  cache_ = init_cache(problem_, params_, config_.cache_init);
}

std::size_t TrainingSession::iterations_per_epoch() const {
  const std::size_t n = problem_.split.train.size();
  return (n + config_.batch_size - 1) / config_.batch_size;
}

IterationStats TrainingSession::step() {
  ++iteration_;
  const auto batch = sample_minibatch(problem_.split.train, config_.batch_size, rng_);
  auto plan = build_plan(problem_.graph, problem_.propagation, batch, config_.layers, config_.sampler(), rng_);
  DropoutSpec dropout{config_.dropout, &rng_};
  const ForwardTrace trace = forward_cve(std::move(plan), problem_, params_, cache_, dropout);

  IterationStats stats;
  stats.loss = minibatch_loss(trace, problem_.split.labels);
  if (!std::isfinite(stats.loss)) throw NonFiniteLossError(iteration_, stats.loss);

  Gradient grad = backward(trace, problem_.split.labels, params_, config_.optimizer.weight_decay);
  for (auto k : config_.frozen_layers) grad[k].fill(0.0);
  stats.grad_sq_norm = squared_norm(grad);

  MatrixList frozen;
  for (auto k : config_.frozen_layers) frozen.push_back(params_.weights[k]);
  optimizer_.step(params_, grad);
  for (std::size_t i = 0; i < config_.frozen_layers.size(); ++i) {
    params_.weights[config_.frozen_layers[i]] = frozen[i];
  }

  update_cache(cache_, trace);
  return stats;
}

double RunMetrics::max_test_accuracy() const {
  double best = 0.0;
  for (const auto& r : records) {
    if (std::isfinite(r.acc.test)) best = std::max(best, r.acc.test);
  }
  return best;
}

double accuracy(const Matrix& scores, std::span<const NodeId> nodes, std::span<const std::int32_t> labels) {
  if (nodes.empty()) throw std::invalid_argument("accuracy: empty node set");
  if (scores.rows() != nodes.size()) throw DimensionError("accuracy: one score row per node required");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto row = scores.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    if (nodes[i] >= labels.size()) throw std::out_of_range("accuracy: node without label entry");
    if (static_cast<std::int32_t>(best) == labels[nodes[i]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

double evaluate(const SparseMatrix& p, const Matrix& x, const ModelParams& params, std::span<const NodeId> nodes,
                std::span<const std::int32_t> labels) {
  if (nodes.empty()) throw std::invalid_argument("evaluate: empty node set");
  return accuracy(forward_exact(p, x, params, nodes), nodes, labels);
}

SplitAccuracy evaluate_splits(const Problem& problem, const ModelParams& params) {
  const Matrix logits = forward_exact_logits(problem, params);
  auto score = [&](const std::vector<NodeId>& nodes) {
    if (nodes.empty()) return std::numeric_limits<double>::quiet_NaN();
    return accuracy(gather_rows(logits, nodes), nodes, problem.split.labels);
  };
  return {score(problem.split.train), score(problem.split.val), score(problem.split.test)};
}

TrainResult train(const Problem& problem, const TrainConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  TrainingSession session(problem, config);

  const std::size_t per_epoch = session.iterations_per_epoch();
  const std::uint64_t total = static_cast<std::uint64_t>(per_epoch) * config.epochs;
  const std::size_t cadence = config.eval_every == 0 ? per_epoch : config.eval_every;

  std::uint64_t tau = total + 1;
  if (config.output_iterate == OutputIterate::kUniformRandom) {
    Rng pick_rng = stream_rng(config.seed, kOutputIterate);
    tau = std::uniform_int_distribution<std::uint64_t>(1, total + 1)(pick_rng);
  }

  TrainResult result;
  auto elapsed = [&] {
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  {
    EvalRecord init;
    init.acc = evaluate_splits(problem, session.params());
    const auto exact = exact_gradient(problem, session.params(), problem.split.train);
    init.loss = exact.loss;
    init.grad_sq_norm = squared_norm(exact.gradient);
    init.wall_s = elapsed();
    result.metrics.records.push_back(init);
  }
  if (tau == 1) {
    result.params = session.params();
    result.selected_iterate = 0;
  }

  double loss_sum = 0.0, grad_sum = 0.0;
  std::size_t since_eval = 0;
  for (std::uint64_t t = 1; t <= total; ++t) {
    const auto stats = session.step();
    loss_sum += stats.loss;
    grad_sum += stats.grad_sq_norm;
    ++since_eval;
    if (t + 1 == tau) {
      result.params = session.params();
      result.selected_iterate = t;
    }
    if (t % cadence == 0) {
      EvalRecord rec;
      rec.epoch = t / per_epoch;
      rec.iter = t;
      rec.acc = evaluate_splits(problem, session.params());
      rec.loss = loss_sum / static_cast<double>(since_eval);
      rec.grad_sq_norm = grad_sum / static_cast<double>(since_eval);
      rec.wall_s = elapsed();
      result.metrics.records.push_back(rec);
      loss_sum = grad_sum = 0.0;
      since_eval = 0;
    }
  }
  if (config.output_iterate == OutputIterate::kLast) {
    result.params = session.params();
    result.selected_iterate = total;
  }
  return result;
}

namespace {
std::string csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics) {
  // Every field is numeric, so no RFC 4180 quoting is ever triggered.
  out << "epoch,iter,train_acc,val_acc,test_acc,loss,grad_sq_norm,wall_s\n";
  for (const auto& r : metrics.records) {
    out << r.epoch << ',' << r.iter << ',' << csv_real(r.acc.train) << ',' << csv_real(r.acc.val) << ','
        << csv_real(r.acc.test) << ',' << csv_real(r.loss) << ',' << csv_real(r.grad_sq_norm) << ','
        << csv_real(r.wall_s) << '\n';
  }
}

}  // namespace cvegnn
