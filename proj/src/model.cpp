// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cvegnn/kernels.hpp"

namespace cvegnn {

double squared_norm(const MatrixList& m) {
  double s = 0.0;
  for (const auto& w : m) {
    for (double v : w.values()) s += v * v;
  }
  return s;
}

double max_abs(const MatrixList& m) {
  double s = 0.0;
  for (const auto& w : m) {
    for (double v : w.values()) s = std::max(s, std::abs(v));
  }
  return s;
}

double max_abs_diff(const MatrixList& a, const MatrixList& b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: layer count mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, max_abs_diff(a[k], b[k]));
  return s;
}

ModelParams ModelParams::zeros(std::vector<std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("ModelParams: need at least input and output dims");
  ModelParams p;
  p.dims = std::move(dims);
  for (std::size_t k = 0; k + 1 < p.dims.size(); ++k) p.weights.emplace_back(p.dims[k], p.dims[k + 1]);
  return p;
}

ModelParams ModelParams::glorot(std::vector<std::size_t> dims, Rng& rng) {
  ModelParams p = zeros(std::move(dims));
  for (auto& w : p.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : w.values()) v = u(rng);
  }
  return p;
}

void ModelParams::validate() const {
  if (dims.size() != weights.size() + 1) throw DimensionError("ModelParams: dims/weights count mismatch");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != dims[k] || weights[k].cols() != dims[k + 1]) {
      throw DimensionError("ModelParams: W^(" + std::to_string(k) + ") has wrong shape");
    }
    if (!all_finite(weights[k])) throw std::invalid_argument("ModelParams: non-finite weight");
  }
}

Problem Problem::from_dataset(Dataset data) {
  if (data.features.rows() != data.graph.num_nodes()) {
    throw DimensionError("Problem: feature rows do not match node count");
  }
  Problem pr;
  pr.propagation = build_normalized_propagation(data.graph);
  pr.propagated = kernels::spmm(pr.propagation, data.features);
  pr.graph = std::move(data.graph);
  pr.features = std::move(data.features);
  pr.split = std::move(data.split);
  pr.num_classes = pr.split.num_classes();
  return pr;
}

HistoricalCache::HistoricalCache(const Matrix& features, MatrixList hidden)
    : features_(&features), hidden_(std::move(hidden)) {}

const Matrix& HistoricalCache::layer(std::size_t k) const {
  if (k == 0) {
    if (features_ == nullptr) throw CacheInvalidError("cache has no feature layer");
    return *features_;
  }
  if (k > hidden_.size()) throw CacheInvalidError("cache layer " + std::to_string(k) + " does not exist");
  return hidden_[k - 1];
}

Matrix& HistoricalCache::hidden_layer(std::size_t k) {
  if (k == 0 || k > hidden_.size()) throw CacheInvalidError("cache hidden layer " + std::to_string(k) + " does not exist");
  return hidden_[k - 1];
}

namespace {

void activate(Matrix& z, Activation a) {
  if (a == Activation::kIdentity) return;
  for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
}

Matrix layer_output(const Matrix& pre, bool last, Activation a) {
  Matrix out = pre;
  if (last) {
    softmax_rows(out);
  } else {
    activate(out, a);
  }
  return out;
}

void check_params(const ModelParams& params, std::size_t feature_dim) {
  params.validate();
  if (params.dims.front() != feature_dim) {
    throw DimensionError("input dim " + std::to_string(params.dims.front()) + " != feature dim " +
                         std::to_string(feature_dim));
  }
}

std::vector<LayerTrace> exact_layers(const SparseMatrix& p, const Matrix& px, const ModelParams& params) {
  const std::size_t layers = params.num_layers();
  std::vector<LayerTrace> out(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    LayerTrace& t = out[k];
    t.input = k == 0 ? px : kernels::spmm(p, out[k - 1].out);
    t.pre = kernels::gemm(t.input, params.weights[k]);
    t.out = layer_output(t.pre, k + 1 == layers, params.hidden_activation);
  }
  return out;
}

MinibatchPlan whole_graph_plan(const SparseMatrix& p, std::span<const NodeId> batch, std::size_t layers) {
  MinibatchPlan plan;
  std::vector<NodeId> all(p.rows);
  std::iota(all.begin(), all.end(), NodeId{0});
  plan.fields.assign(layers + 1, all);
  plan.sampled.assign(layers, p);
  plan.batch.assign(batch.begin(), batch.end());
  plan.batch_rows.assign(batch.begin(), batch.end());
  return plan;
}

std::int32_t checked_label(std::span<const std::int32_t> labels, NodeId v, std::size_t classes) {
  if (v >= labels.size()) throw std::out_of_range("no label entry for node " + std::to_string(v));
  const std::int32_t y = labels[v];
  if (y < 0 || static_cast<std::size_t>(y) >= classes) {
    throw std::out_of_range("label " + std::to_string(y) + " of node " + std::to_string(v) + " outside [0, " +
                            std::to_string(classes) + ")");
  }
  return y;
}

}  // namespace

std::pair<Matrix, Matrix> apply_dropout(const Matrix& m, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  Matrix mask(m.rows(), m.cols(), 1.0);
  if (!training || rate == 0.0) return {m, std::move(mask)};
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix out = m;
  auto mv = mask.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < mv.size(); ++i) {
    mv[i] = u(rng) < rate ? 0.0 : keep_scale;
    ov[i] *= mv[i];
  }
  return {std::move(out), std::move(mask)};
}

void softmax_rows(Matrix& z) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

double cross_entropy(std::span<const double> logits, std::int32_t label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::out_of_range("cross_entropy: label out of range");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  return std::log(sum) + mx - logits[static_cast<std::size_t>(label)];
}

Matrix forward_exact(const SparseMatrix& p, const Matrix& x, const ModelParams& params,
                     std::span<const NodeId> nodes) {
  check_params(params, x.cols());
  if (p.rows != x.rows() || p.cols != x.rows()) throw DimensionError("forward_exact: P does not match X");
  auto layers = exact_layers(p, kernels::spmm(p, x), params);
  return gather_rows(layers.back().out, nodes);
}

Matrix forward_exact(const Problem& problem, const ModelParams& params, std::span<const NodeId> nodes) {
  check_params(params, problem.features.cols());
  auto layers = exact_layers(problem.propagation, problem.propagated, params);
  return gather_rows(layers.back().out, nodes);
}

Matrix forward_exact_logits(const Problem& problem, const ModelParams& params) {
  check_params(params, problem.features.cols());
  auto layers = exact_layers(problem.propagation, problem.propagated, params);
  return std::move(layers.back().pre);
}

ForwardTrace forward_exact_trace(const Problem& problem, const ModelParams& params, std::span<const NodeId> batch) {
  check_params(params, problem.features.cols());
  ForwardTrace trace;
  trace.plan = whole_graph_plan(problem.propagation, batch, params.num_layers());
  trace.layers = exact_layers(problem.propagation, problem.propagated, params);
  return trace;
}

ForwardTrace forward_cve(MinibatchPlan plan, const Problem& problem, const ModelParams& params,
                         const HistoricalCache& cache, DropoutSpec dropout) {
  check_params(params, problem.features.cols());
  const std::size_t layers = params.num_layers();
  if (plan.num_layers() != layers) {
    throw DimensionError("forward_cve: plan has " + std::to_string(plan.num_layers()) + " layers, model has " +
                         std::to_string(layers));
  }
  if (cache.num_layers() != layers) {
    throw CacheInvalidError("forward_cve: cache holds " + std::to_string(cache.num_layers()) +
                            " layers, model has " + std::to_string(layers));
  }
  const std::size_t n = problem.graph.num_nodes();
  for (std::size_t k = 1; k < layers; ++k) {
    const Matrix& hb = cache.layer(k);
    if (hb.rows() != n || hb.cols() != params.dims[k]) {
      throw CacheInvalidError("forward_cve: cache layer " + std::to_string(k) + " is " + std::to_string(hb.rows()) +
                              "x" + std::to_string(hb.cols()) + ", expected " + std::to_string(n) + "x" +
                              std::to_string(params.dims[k]));
    }
  }
  if (dropout.active() && dropout.rng == nullptr) throw std::invalid_argument("forward_cve: dropout needs an rng");

  ForwardTrace trace;
  trace.layers.resize(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    LayerTrace& t = trace.layers[k];
    const auto& upper = plan.fields[k + 1];
    if (k == 0) {
      // Hbar^(0) = H^(0) = X, so the sampled correction vanishes.
      t.input = gather_rows(problem.propagated, upper);
    } else {
      const Matrix& h = trace.layers[k - 1].out;
      Matrix delta = gather_rows(cache.layer(k), plan.fields[k]);
      auto dv = delta.values();
      auto hv = h.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = hv[i] - dv[i];
      t.input = kernels::spmm(plan.sampled[k], delta);
      Matrix hist = kernels::spmm_rows(problem.propagation, cache.layer(k), upper);
      auto iv = t.input.values();
      auto sv = hist.values();
      for (std::size_t i = 0; i < iv.size(); ++i) iv[i] += sv[i];
    }
    if (dropout.active()) {
      auto [dropped, mask] = apply_dropout(t.input, dropout.rate, *dropout.rng, true);
      t.input = std::move(dropped);
      t.mask = std::move(mask);
    }
    t.pre = kernels::gemm(t.input, params.weights[k]);
    t.out = layer_output(t.pre, k + 1 == layers, params.hidden_activation);
  }
  trace.plan = std::move(plan);
  return trace;
}

double minibatch_loss(const ForwardTrace& trace, std::span<const std::int32_t> labels) {
  const auto& plan = trace.plan;
  if (plan.batch.empty()) throw std::invalid_argument("minibatch_loss: empty minibatch");
  const Matrix& logits = trace.layers.back().pre;
  double total = 0.0;
  for (std::size_t i = 0; i < plan.batch.size(); ++i) {
    const auto y = checked_label(labels, plan.batch[i], logits.cols());
    total += cross_entropy(logits.row(plan.batch_rows[i]), y);
  }
  return total / static_cast<double>(plan.batch.size());
}

Gradient backward(const ForwardTrace& trace, std::span<const std::int32_t> labels, const ModelParams& params,
                  double weight_decay) {
  const std::size_t layers = params.num_layers();
  const auto& plan = trace.plan;
  if (trace.layers.size() != layers || plan.num_layers() != layers) {
    throw DimensionError("backward: trace does not match model depth");
  }
  for (std::size_t k = 0; k < layers; ++k) {
    if (trace.layers[k].input.cols() != params.dims[k] || trace.layers[k].pre.cols() != params.dims[k + 1]) {
      throw DimensionError("backward: trace layer " + std::to_string(k) + " does not match params");
    }
  }
  if (plan.batch.empty()) throw std::invalid_argument("backward: empty minibatch");

  const Matrix& probs = trace.probabilities();
  Matrix dz(probs.rows(), probs.cols());
  const double inv_batch = 1.0 / static_cast<double>(plan.batch.size());
  for (std::size_t i = 0; i < plan.batch.size(); ++i) {
    const auto y = checked_label(labels, plan.batch[i], probs.cols());
    const std::size_t r = plan.batch_rows[i];
    auto g = dz.row(r);
    auto p = probs.row(r);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] += p[c] * inv_batch;
    g[static_cast<std::size_t>(y)] -= inv_batch;
  }

  Gradient grad(layers);
  for (std::size_t k = layers; k-- > 0;) {
    const LayerTrace& t = trace.layers[k];
    grad[k] = kernels::gemm_tn(t.input, dz);
    if (weight_decay != 0.0) {
      auto gv = grad[k].values();
      auto wv = params.weights[k].values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += weight_decay * wv[i];
    }
    if (k == 0) break;

    Matrix d_input = kernels::gemm_nt(dz, params.weights[k]);
    if (!t.mask.empty()) {
      auto dv = d_input.values();
      auto mv = t.mask.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= mv[i];
    }
    // Only the sampled path depends on H^(k); the cache term is constant.
    Matrix dh = kernels::spmm(plan.sampled[k].transposed(), d_input);
    if (params.hidden_activation == Activation::kRelu) {
      auto dv = dh.values();
      auto zv = trace.layers[k - 1].pre.values();
      for (std::size_t i = 0; i < dv.size(); ++i) {
        if (!(zv[i] > 0.0)) dv[i] = 0.0;
      }
    }
    dz = std::move(dh);
  }
  return grad;
}

HistoricalCache init_cache(const Problem& problem, const ModelParams& params, CacheInit mode) {
  check_params(params, problem.features.cols());
  const std::size_t layers = params.num_layers();
  MatrixList hidden;
  for (std::size_t k = 1; k < layers; ++k) {
    Matrix agg = k == 1 ? problem.propagated : kernels::spmm(problem.propagation, hidden.back());
    Matrix h = kernels::gemm(agg, params.weights[k - 1]);
    if (mode == CacheInit::kActivated) activate(h, params.hidden_activation);
    hidden.push_back(std::move(h));
  }
  return HistoricalCache(problem.features, std::move(hidden));
}

void update_cache(HistoricalCache& cache, const ForwardTrace& trace) {
  const std::size_t layers = trace.layers.size();
  if (cache.num_layers() != layers) throw CacheInvalidError("update_cache: depth mismatch");
  for (std::size_t k = 1; k < layers; ++k) {
    Matrix& hb = cache.hidden_layer(k);
    const Matrix& h = trace.layers[k - 1].out;
    const auto& field = trace.plan.fields[k];
    if (h.cols() != hb.cols() || h.rows() != field.size()) {
      throw CacheInvalidError("update_cache: trace layer " + std::to_string(k) + " does not match cache");
    }
    for (std::size_t i = 0; i < field.size(); ++i) {
      auto src = h.row(i);
      std::copy(src.begin(), src.end(), hb.row(field[i]).begin());
    }
  }
}

}  // namespace cvegnn
