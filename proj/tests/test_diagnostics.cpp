// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cvegnn/diagnostics.hpp"
#include "cvegnn/sbm.hpp"
#include "test_util.hpp"

namespace cvegnn {
namespace {

ModelParams random_params(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  Rng rng(seed);
  return ModelParams::glorot(dims, rng);
}

TEST(FiniteDifference, QuadraticIsExact) {
  const ModelParams p = random_params({3, 4, 2}, 1);
  const LossFunction f = [](const ModelParams& w) { return 0.5 * squared_norm(w.weights); };
  const Gradient g = finite_difference_gradient(f, p, 1e-3);
  EXPECT_LT(max_abs_diff(g, p.weights), 1e-10);
}

TEST(FiniteDifference, LinearIsExact) {
  const ModelParams p = random_params({2, 3}, 2);
  std::mt19937_64 gen(3);
  const Matrix c = testing::random_matrix(2, 3, gen);
  const LossFunction f = [&](const ModelParams& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += c.data()[j] * w.weights[0].data()[j];
    return s;
  };
  const Gradient g = finite_difference_gradient(f, p, 1e-4);
  EXPECT_LT(max_abs_diff(g[0], c), 1e-10);
  EXPECT_THROW(finite_difference_gradient(f, p, 0.0), std::invalid_argument);
}

TEST(FiniteDifference, ErrorShrinksQuadraticallyInStep) {
  std::mt19937_64 gen(4);
  const Problem pr = testing::random_problem(12, 0.3, 4, 3, gen);
  const ModelParams params = random_params(testing::dims_for(pr, 5, 2), 5);
  const ExactGradient exact = exact_gradient(pr, params, pr.split.train);
  const LossFunction f = [&](const ModelParams& w) { return exact_gradient(pr, w, pr.split.train).loss; };
  const double e1 = max_abs_diff(finite_difference_gradient(f, params, 4e-3), exact.gradient);
  const double e2 = max_abs_diff(finite_difference_gradient(f, params, 2e-3), exact.gradient);
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(GradientCheck, SmallSbmPasses) {
  SbmConfig sc;
  sc.nodes = 8;
  sc.p_in = 0.6;
  sc.p_out = 0.2;
  sc.dim = 4;
  const Problem pr = Problem::from_dataset(gen_sbm(sc));
  const ModelParams params = random_params(testing::dims_for(pr, 5, 2), 6);
  HistoricalCache cache = init_cache(pr, params);
  Rng rng(7);
  SamplerConfig s;
  s.neighbors = 2;
  const auto batch = sample_minibatch(pr.split.train, 3, rng);
  const auto plan = build_plan(pr.graph, pr.propagation, batch, 2, s, rng);
  const GradCheckResult r = gradient_check(pr, params, cache, plan, 1e-5, 1e-3);
  EXPECT_LT(r.max_rel_error, 1e-5);
  EXPECT_EQ(r.coordinates, 4u * 5u + 5u * 2u);
}

TEST(ExactGradient, WeightDecayTerms) {
  std::mt19937_64 gen(8);
  const Problem pr = testing::random_problem(10, 0.3, 3, 2, gen);
  const ModelParams params = random_params(testing::dims_for(pr, 4, 2), 9);
  const auto plain = exact_gradient(pr, params, pr.split.train);
  const auto decayed = exact_gradient(pr, params, pr.split.train, 0.1);
  EXPECT_NEAR(decayed.loss - plain.loss, 0.05 * squared_norm(params.weights), 1e-12);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < params.weights[k].size(); ++j) {
      EXPECT_NEAR(decayed.gradient[k].data()[j] - plain.gradient[k].data()[j], 0.1 * params.weights[k].data()[j],
                  1e-12);
    }
  }
  EXPECT_THROW(exact_gradient(pr, params, std::vector<NodeId>{}), std::invalid_argument);
}

TEST(BiasProbe, FullSamplingFullBatchExactCacheIsZero) {
  std::mt19937_64 gen(10);
  const Problem pr = testing::random_problem(15, 0.3, 3, 3, gen);
  const ModelParams params = random_params(testing::dims_for(pr, 4, 2), 11);
  const HistoricalCache cache = init_cache(pr, params);
  BiasProbeConfig c;
  c.sampler.neighbors = pr.graph.max_degree() + 1;
  c.full_batch = true;
  c.samples = 50;
  const BiasEstimate e = bias_probe(pr, params, cache, c);
  EXPECT_LE(e.estimate, 3.0 * e.std_error + 1e-12);
  EXPECT_LT(e.max_std_error, 1e-12);
}

// Full neighbor sampling with minibatches: only the batch draw is random.
TEST(BiasProbe, FullSamplingIsUnbiasedForAnyWeights) {
  std::mt19937_64 gen(12);
  const Problem pr = testing::random_problem(15, 0.3, 3, 3, gen);
  const ModelParams params = random_params(testing::dims_for(pr, 4, 2), 13);
  // A stale cache: activations from different weights.
  const HistoricalCache cache = init_cache(pr, random_params(testing::dims_for(pr, 4, 2), 14));
  BiasProbeConfig c;
  c.sampler.neighbors = pr.graph.max_degree() + 1;
  c.sampler.batch_size = 4;
  c.samples = 4000;
  c.seed = 15;
  const BiasEstimate e = bias_probe(pr, params, cache, c);
  EXPECT_LE(e.estimate, 4.0 * e.max_std_error);
  EXPECT_GT(e.max_std_error, 0.0);
}

std::vector<std::vector<NodeId>> pool_choices(const Graph& g, NodeId v) {
  std::vector<std::vector<NodeId>> out{{v}};
  for (NodeId u : g.neighbors(v)) out.push_back({u});
  return out;
}

// Exact expectation of the sampled gradient by enumerating every layer-1
// plan (D = 1, without replacement) on a 4-node path, exact cache.
TEST(BiasProbe, PathGraphEnumerationMatchesExactGradient) {
  Dataset d;
  d.graph = testing::path_graph(4);
  std::mt19937_64 gen(16);
  d.features = testing::random_matrix(4, 3, gen);
  d.split.labels = {0, 1, 1, 0};
  d.split.train = {0, 1, 2, 3};
  const Problem pr = Problem::from_dataset(std::move(d));
  ModelParams params = random_params({3, 4, 2}, 17);
  params.hidden_activation = Activation::kIdentity;
  const HistoricalCache cache = init_cache(pr, params);
  const ExactGradient exact = exact_gradient(pr, params, pr.split.train);

  const MinibatchPlan full = build_full_plan(pr.graph, pr.propagation, pr.split.train, 2);
  const auto& rows = full.fields[2];
  const auto& cols = full.fields[1];
  std::vector<std::size_t> local(4);
  for (std::size_t j = 0; j < cols.size(); ++j) local[cols[j]] = j;

  Gradient expected;
  double total_prob = 0.0;
  std::vector<std::size_t> pick(4, 0);
  for (;;) {
    MinibatchPlan plan = full;
    SparseMatrix& s = plan.sampled[1];
    s.col_idx.clear();
    s.values.clear();
    s.row_ptr.assign(1, 0);
    double prob = 1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const NodeId v = rows[i];
      const auto choices = pool_choices(pr.graph, v);
      const NodeId u = choices[pick[i]][0];
      prob /= static_cast<double>(choices.size());
      const double pvu = 1.0 / std::sqrt(static_cast<double>((pr.graph.degree(v) + 1) * (pr.graph.degree(u) + 1)));
      s.col_idx.push_back(static_cast<NodeId>(local[u]));
      s.values.push_back(static_cast<double>(choices.size()) * pvu);
      s.row_ptr.push_back(s.col_idx.size());
    }
    validate_plan(plan);
    const Gradient g = backward(forward_cve(plan, pr, params, cache), pr.split.labels, params, 0.0);
    if (expected.empty()) {
      for (const auto& m : g) expected.emplace_back(m.rows(), m.cols());
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
      for (std::size_t j = 0; j < g[k].size(); ++j) expected[k].data()[j] += prob * g[k].data()[j];
    }
    total_prob += prob;
    std::size_t i = 0;
    while (i < 4 && ++pick[i] == pool_choices(pr.graph, rows[i]).size()) pick[i++] = 0;
    if (i == 4) break;
  }
  EXPECT_NEAR(total_prob, 1.0, 1e-15);
  EXPECT_LT(max_abs_diff(expected, exact.gradient), 1e-12);

  BiasProbeConfig c;
  c.sampler.neighbors = 1;
  c.full_batch = true;
  c.samples = 2000;
  c.seed = 18;
  const BiasEstimate e = bias_probe(pr, params, cache, c);
  EXPECT_LE(e.estimate, 4.0 * e.max_std_error);
}

TEST(BiasProbe, RejectsTooFewSamples) {
  std::mt19937_64 gen(19);
  const Problem pr = testing::random_problem(6, 0.5, 2, 2, gen);
  const ModelParams params = random_params(testing::dims_for(pr, 3, 2), 20);
  BiasProbeConfig c;
  c.samples = 1;
  EXPECT_THROW(bias_probe(pr, params, init_cache(pr, params), c), std::invalid_argument);
}

TrainConfig probe_train(OptimizerKind kind) {
  TrainConfig t;
  t.optimizer = OptimizerConfig::defaults_for(kind);
  t.hidden_dim = 4;
  t.batch_size = 3;
  t.seed = 21;
  return t;
}

TEST(RateProbe, TinyStepReproducesInitialGradientNorm) {
  std::mt19937_64 gen(22);
  const Problem pr = testing::random_problem(12, 0.3, 3, 3, gen);
  RateProbeConfig c;
  c.train = probe_train(OptimizerKind::kSgd);
  c.eta = 1e-12;
  c.horizons = {4, 16};
  const RateTrace r = rate_probe(pr, c);
  const TrainingSession fresh(pr, c.train);
  const double g0 = squared_norm(exact_gradient(pr, fresh.params(), pr.split.train).gradient);
  ASSERT_EQ(r.points.size(), 2u);
  for (const auto& p : r.points) {
    EXPECT_NEAR(p.statistic, g0, 1e-6 * g0);
    EXPECT_EQ(p.evaluations, p.horizon);
  }
  EXPECT_DOUBLE_EQ(r.points[1].alpha, 1e-12 / 4.0);
}

TEST(RateProbe, ConstantLossGivesZero) {
  std::mt19937_64 gen(23);
  const Problem pr = testing::random_problem(12, 0.3, 3, 3, gen);
  RateProbeConfig c;
  c.train = probe_train(OptimizerKind::kAmsgrad);
  c.train.frozen_layers = {1};
  c.horizons = {5, 20};
  // A zero, frozen readout makes the loss constant in the first layer.
  ModelParams init = random_params(testing::dims_for(pr, 4, 2), 24);
  init.weights[1].fill(0.0);
  c.initial = init;
  const RateTrace r = rate_probe(pr, c);
  for (const auto& p : r.points) EXPECT_EQ(p.statistic, 0.0);
}

TEST(RateProbe, StatisticsFiniteAndNonNegative) {
  std::mt19937_64 gen(25);
  const Problem pr = testing::random_problem(12, 0.3, 3, 3, gen);
  for (auto kind : {OptimizerKind::kHeavyBall, OptimizerKind::kAmsgrad, OptimizerKind::kAdagrad}) {
    RateProbeConfig c;
    c.train = probe_train(kind);
    c.eta = 0.5;
    c.horizons = {10, 40, 160};
    c.max_evaluations = 20;
    const RateTrace r = rate_probe(pr, c);
    for (const auto& p : r.points) {
      EXPECT_TRUE(std::isfinite(p.statistic));
      EXPECT_GE(p.statistic, 0.0);
      EXPECT_GE(p.std_error, 0.0);
      EXPECT_LE(p.evaluations, 20u);
    }
  }
}

TEST(RateProbe, RejectsBadGrid) {
  std::mt19937_64 gen(26);
  const Problem pr = testing::random_problem(6, 0.5, 2, 2, gen);
  RateProbeConfig c;
  c.train = probe_train(OptimizerKind::kSgd);
  c.horizons = {};
  EXPECT_THROW(rate_probe(pr, c), std::invalid_argument);
  c.horizons = {10, 10};
  EXPECT_THROW(rate_probe(pr, c), std::invalid_argument);
  c.horizons = {0};
  EXPECT_THROW(rate_probe(pr, c), std::invalid_argument);
}

TEST(ProbeCsv, Format) {
  std::ostringstream out;
  write_probe_csv_header(out);
  BiasEstimate e;
  e.alpha = 0.25;
  e.estimate = 1.5;
  e.std_error = 0.125;
  e.samples = 1000;
  write_probe_csv(out, e);
  RateTrace t;
  t.points.push_back({100, 0.01, 2.0, 0.5, 50});
  write_probe_csv(out, "amsgrad", t);
  EXPECT_EQ(out.str(),
            "probe,param,estimate,stderr,samples\n"
            "bias,0.25,1.5,0.125,1000\n"
            "amsgrad,100,2,0.5,50\n");
}

}  // namespace
}  // namespace cvegnn
