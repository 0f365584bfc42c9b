// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cvegnn/kernels.hpp"

namespace cvegnn {

ExactGradient exact_gradient(const Problem& problem, const ModelParams& params, std::span<const NodeId> nodes,
                             double weight_decay) {
  if (nodes.empty()) throw std::invalid_argument("exact_gradient: empty node set");
  const ForwardTrace trace = forward_exact_trace(problem, params, nodes);
  ExactGradient out;
  out.loss = minibatch_loss(trace, problem.split.labels);
  if (weight_decay != 0.0) out.loss += 0.5 * weight_decay * squared_norm(params.weights);
  out.gradient = backward(trace, problem.split.labels, params, weight_decay);
  return out;
}

Gradient finite_difference_gradient(const LossFunction& loss, const ModelParams& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  ModelParams probe = params;
  Gradient grad;
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    Matrix g(params.weights[k].rows(), params.weights[k].cols());
    double* w = probe.weights[k].data();
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double saved = w[j];
      w[j] = saved + h;
      const double up = loss(probe);
      w[j] = saved - h;
      const double down = loss(probe);
      w[j] = saved;
      g.data()[j] = (up - down) / (2.0 * h);
    }
    grad.push_back(std::move(g));
  }
  return grad;
}

GradCheckResult gradient_check(const Problem& problem, const ModelParams& params, const HistoricalCache& cache,
                               const MinibatchPlan& plan, double h, double weight_decay, double floor) {
  const auto& labels = problem.split.labels;
  const ForwardTrace trace = forward_cve(plan, problem, params, cache);
  const Gradient analytic = backward(trace, labels, params, weight_decay);
  const LossFunction loss = [&](const ModelParams& w) {
    double f = minibatch_loss(forward_cve(plan, problem, w, cache), labels);
    if (weight_decay != 0.0) f += 0.5 * weight_decay * squared_norm(w.weights);
    return f;
  };
  const Gradient numeric = finite_difference_gradient(loss, params, h);
  GradCheckResult out;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    for (std::size_t j = 0; j < analytic[k].size(); ++j) {
      const double a = analytic[k].data()[j];
      const double n = numeric[k].data()[j];
      const double err = std::abs(a - n);
      out.max_abs_error = std::max(out.max_abs_error, err);
      out.max_rel_error = std::max(out.max_rel_error, err / std::max({std::abs(a), std::abs(n), floor}));
      ++out.coordinates;
    }
  }
  return out;
}

namespace {

Rng draw_rng(std::uint64_t seed, std::uint64_t draw) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
  return Rng(seq);
}

MatrixList zeros_like(const MatrixList& m) {
  MatrixList out;
  for (const auto& x : m) out.emplace_back(x.rows(), x.cols());
  return out;
}

}  // namespace

BiasEstimate bias_probe(const Problem& problem, const ModelParams& params, const HistoricalCache& cache,
                        const BiasProbeConfig& config) {
  if (config.samples < 2) throw std::invalid_argument("bias_probe: at least 2 samples required");
  const auto& train = problem.split.train;
  if (!config.full_batch) config.sampler.validate(train.size());
  const std::size_t layers = params.num_layers();

  const ExactGradient exact = exact_gradient(problem, params, train);

  // Welford accumulation in draw order; draws are computed in parallel chunks.
  MatrixList mean = zeros_like(params.weights);
  MatrixList m2 = zeros_like(params.weights);
  const std::size_t chunk = 64;
  std::vector<Gradient> grads(chunk);
  std::size_t seen = 0;
  for (std::size_t begin = 0; begin < config.samples; begin += chunk) {
    const auto count = static_cast<std::ptrdiff_t>(std::min(chunk, config.samples - begin));
#pragma omp parallel for schedule(dynamic) num_threads(kernels::max_threads())
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      Rng rng = draw_rng(config.seed, begin + static_cast<std::size_t>(i));
      std::vector<NodeId> batch =
          config.full_batch ? train : sample_minibatch(train, config.sampler.batch_size, rng);
      auto plan = build_plan(problem.graph, problem.propagation, batch, layers, config.sampler, rng);
      const ForwardTrace trace = forward_cve(std::move(plan), problem, params, cache);
      grads[static_cast<std::size_t>(i)] = backward(trace, problem.split.labels, params, 0.0);
    }
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      ++seen;
      const auto& g = grads[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < layers; ++k) {
        double* mu = mean[k].data();
        double* s = m2[k].data();
        const double* x = g[k].data();
        for (std::size_t j = 0; j < g[k].size(); ++j) {
          const double d = x[j] - mu[j];
          mu[j] += d / static_cast<double>(seen);
          s[j] += d * (x[j] - mu[j]);
        }
      }
    }
  }

  BiasEstimate out;
  out.alpha = config.alpha;
  out.samples = config.samples;
  out.std_errors = zeros_like(params.weights);
  const double n = static_cast<double>(config.samples);
  for (std::size_t k = 0; k < layers; ++k) {
    for (std::size_t j = 0; j < mean[k].size(); ++j) {
      const double se = std::sqrt(m2[k].data()[j] / (n - 1.0) / n);
      out.std_errors[k].data()[j] = se;
      out.max_std_error = std::max(out.max_std_error, se);
      const double diff = std::abs(mean[k].data()[j] - exact.gradient[k].data()[j]);
      if (diff > out.estimate || (k == 0 && j == 0)) {
        out.estimate = diff;
        out.std_error = se;
      }
    }
  }
  return out;
}

RateTrace rate_probe(const Problem& problem, const RateProbeConfig& config) {
  if (config.horizons.empty()) throw std::invalid_argument("rate_probe: empty T grid");
  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    if (config.horizons[i] < 1) throw std::invalid_argument("rate_probe: T must be >= 1");
    if (i > 0 && config.horizons[i] <= config.horizons[i - 1]) {
      throw std::invalid_argument("rate_probe: T grid must be strictly increasing");
    }
  }
  if (!(config.eta > 0.0)) throw std::invalid_argument("rate_probe: eta must be > 0");
  if (config.max_evaluations < 1) throw std::invalid_argument("rate_probe: max_evaluations must be >= 1");

  const auto& frozen = config.train.frozen_layers;
  const double wd = config.train.optimizer.weight_decay;
  auto sq_norm = [&](const ModelParams& params) {
    const auto g = exact_gradient(problem, params, problem.split.train, wd).gradient;
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::find(frozen.begin(), frozen.end(), k) != frozen.end()) continue;
      for (double x : g[k].values()) s += x * x;
    }
    return s;
  };

  RateTrace trace;
  for (const std::uint64_t horizon : config.horizons) {
    TrainConfig tc = config.train;
    tc.optimizer.lr = config.eta / std::sqrt(static_cast<double>(horizon));
    TrainingSession session = config.initial ? TrainingSession(problem, tc, *config.initial)
                                             : TrainingSession(problem, tc);
    const std::uint64_t stride = std::max<std::uint64_t>(1, (horizon + config.max_evaluations - 1) /
                                                                config.max_evaluations);
    std::vector<double> values;
    // Iterate W_t has had t - 1 updates applied.
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      if (t > 1) session.step();
      if ((t - 1) % stride == 0) values.push_back(sq_norm(session.params()));
    }
    RatePoint pt;
    pt.horizon = horizon;
    pt.alpha = tc.optimizer.lr;
    pt.evaluations = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    pt.statistic = mean;
    if (values.size() > 1) pt.std_error = std::sqrt(var / static_cast<double>(values.size() - 1) /
                                                    static_cast<double>(values.size()));
    trace.points.push_back(pt);
  }
  return trace;
}

namespace {
std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

void write_probe_csv_header(std::ostream& out) { out << "probe,param,estimate,stderr,samples\n"; }

void write_probe_csv(std::ostream& out, const BiasEstimate& e) {
  out << "bias," << real(e.alpha) << ',' << real(e.estimate) << ',' << real(e.std_error) << ',' << e.samples
      << '\n';
}

void write_probe_csv(std::ostream& out, const std::string& probe, const RateTrace& trace) {
  for (const auto& p : trace.points) {
    out << probe << ',' << p.horizon << ',' << real(p.statistic) << ',' << real(p.std_error) << ','
        << p.evaluations << '\n';
  }
}

}  // namespace cvegnn
