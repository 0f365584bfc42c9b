// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cvegnn/diagnostics.hpp"
#include "cvegnn/kernels.hpp"
#include "test_util.hpp"

namespace cvegnn {
namespace {

using testing::dims_for;
using testing::random_matrix;
using testing::random_problem;
using Dense = std::vector<std::vector<double>>;

std::vector<NodeId> all_nodes(const Problem& p) {
  std::vector<NodeId> v(p.graph.num_nodes());
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

// Explicit-loop forward pass over dense P.
Dense oracle_forward(const Problem& pr, const ModelParams& params) {
  const Dense p = testing::dense_propagation(pr.graph);
  Dense h = testing::to_dense(pr.features);
  const std::size_t n = h.size();
  for (std::size_t k = 0; k < params.num_layers(); ++k) {
    const Matrix& w = params.weights[k];
    Dense z(n, std::vector<double>(w.cols(), 0.0));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        double s = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
          for (std::size_t j = 0; j < w.rows(); ++j) s += p[v][u] * h[u][j] * w(j, c);
        }
        z[v][c] = s;
      }
    }
    if (k + 1 < params.num_layers()) {
      for (auto& row : z) {
        for (double& x : row) x = std::max(x, 0.0);
      }
    } else {
      for (auto& row : z) {
        double mx = row[0];
        for (double x : row) mx = std::max(mx, x);
        double sum = 0.0;
        for (double& x : row) sum += (x = std::exp(x - mx));
        for (double& x : row) x /= sum;
      }
    }
    h = z;
  }
  return h;
}

TEST(Forward, ZeroWeightsGiveUniformProbabilities) {
  std::mt19937_64 rng(1);
  const Problem pr = random_problem(6, 0.4, 3, 4, rng);
  const ModelParams params = ModelParams::zeros(dims_for(pr, 0, 1));
  const Matrix probs = forward_exact(pr, params, all_nodes(pr));
  for (double v : probs.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, IdentityWeightExposesPropagatedFeatures) {
  std::mt19937_64 rng(2);
  const Problem pr = random_problem(7, 0.4, 3, 3, rng);
  ModelParams params = ModelParams::zeros({3, 3});
  for (std::size_t i = 0; i < 3; ++i) params.weights[0](i, i) = 1.0;
  EXPECT_EQ(forward_exact_logits(pr, params), kernels::serial::spmm(pr.propagation, pr.features));
}

TEST(Forward, MatchesDenseOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Problem pr = random_problem(10, 0.3, 4, 3, rng);
    Rng init(static_cast<std::uint64_t>(trial));
    const ModelParams params = ModelParams::glorot(dims_for(pr, 6, 2), init);
    const Dense want = oracle_forward(pr, params);
    const Matrix got = forward_exact(pr.propagation, pr.features, params, all_nodes(pr));
    for (std::size_t v = 0; v < want.size(); ++v) {
      for (std::size_t c = 0; c < want[v].size(); ++c) EXPECT_NEAR(got(v, c), want[v][c], 1e-10);
    }
  }
}

TEST(Forward, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(4);
  Matrix z = random_matrix(50, 7, rng, 30.0);
  softmax_rows(z);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double s = 0.0;
    for (double v : z.row(r)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Loss, HandValues) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_NEAR(cross_entropy(zero, 0), std::log(2.0), 1e-15);
  const std::vector<double> l{1.0, 2.0, 3.0};
  EXPECT_NEAR(cross_entropy(l, 2), std::log(1.0 + std::exp(-1.0) + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(cross_entropy(l, 2), 0.407606, 1e-6);
  const std::vector<double> sure{800.0, 0.0};
  EXPECT_EQ(cross_entropy(sure, 0), 0.0);
  EXPECT_THROW(cross_entropy(l, 3), std::out_of_range);
}

TEST(Loss, NonNegativeOnRandomLogits) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Matrix l = random_matrix(1, 5, rng, 50.0);
    EXPECT_GE(cross_entropy(l.row(0), static_cast<std::int32_t>(i % 5)), 0.0);
  }
}

class CveFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 gen(6);
    pr_ = random_problem(12, 0.3, 4, 3, gen);
    Rng init(7);
    params_ = ModelParams::glorot(dims_for(pr_, 5, 2), init);
  }
  HistoricalCache random_cache(std::mt19937_64& gen) const {
    MatrixList hidden;
    for (std::size_t k = 1; k < params_.num_layers(); ++k) {
      hidden.push_back(random_matrix(pr_.graph.num_nodes(), params_.dims[k], gen));
    }
    return HistoricalCache(pr_.features, hidden);
  }
  Problem pr_;
  ModelParams params_;
};

TEST_F(CveFixture, FullSamplingEqualsExactForAnyCache) {
  std::mt19937_64 gen(8);
  const std::vector<NodeId> batch{0, 4, 4, 11};
  const auto plan = build_full_plan(pr_.graph, pr_.propagation, batch, 2);
  const Matrix exact = forward_exact(pr_, params_, plan.fields[2]);
  for (int trial = 0; trial < 10; ++trial) {
    const HistoricalCache cache = random_cache(gen);
    const ForwardTrace t = forward_cve(plan, pr_, params_, cache);
    EXPECT_LE(max_abs_diff(t.probabilities(), exact), 1e-12);
  }
  const ForwardTrace primed = forward_cve(plan, pr_, params_, init_cache(pr_, params_));
  EXPECT_LE(max_abs_diff(primed.probabilities(), exact), 1e-12);
}

TEST_F(CveFixture, ZeroWeightZeroesActivations) {
  std::mt19937_64 gen(9);
  ModelParams p = params_;
  p.weights[0].fill(0.0);
  SamplerConfig cfg;
  Rng rng(1);
  const std::vector<NodeId> batch{1, 2};
  const auto t = forward_cve(build_plan(pr_.graph, pr_.propagation, batch, 2, cfg, rng), pr_, p, random_cache(gen));
  for (double v : t.layers[0].out.values()) EXPECT_EQ(v, 0.0);
}

TEST_F(CveFixture, MismatchedCacheRejected) {
  const std::vector<NodeId> batch{1};
  const auto plan = build_full_plan(pr_.graph, pr_.propagation, batch, 2);
  const HistoricalCache bad(pr_.features, {Matrix(3, 5)});
  EXPECT_THROW(forward_cve(plan, pr_, params_, bad), CacheInvalidError);
  const HistoricalCache shallow(pr_.features, {});
  EXPECT_THROW(forward_cve(plan, pr_, params_, shallow), CacheInvalidError);
}

TEST(Backward, ConfidentCorrectPredictionsGiveZeroGradient) {
  // Isolated nodes (P = I), one-hot features, W = 100 I.
  Dataset d;
  d.graph = Graph::from_edges(3, std::vector<std::pair<NodeId, NodeId>>{});
  d.features = Matrix(3, 3);
  for (std::size_t i = 0; i < 3; ++i) d.features(i, i) = 1.0;
  d.split.labels = {0, 1, 2};
  d.split.train = {0, 1, 2};
  const Problem pr = Problem::from_dataset(std::move(d));
  ModelParams params = ModelParams::zeros({3, 3});
  for (std::size_t i = 0; i < 3; ++i) params.weights[0](i, i) = 100.0;
  const auto ex = exact_gradient(pr, params, pr.split.train);
  EXPECT_LE(max_abs(ex.gradient), 1e-12);
  const auto wd = exact_gradient(pr, params, pr.split.train, 0.5);
  MatrixList decay = params.weights;
  for (double& x : decay[0].values()) x *= 0.5;
  EXPECT_LE(max_abs_diff(wd.gradient, decay), 1e-12);
}

TEST(Backward, OneLayerClosedForm) {
  std::mt19937_64 gen(10);
  const Problem pr = random_problem(9, 0.35, 4, 3, gen);
  Rng init(11);
  const ModelParams params = ModelParams::glorot(dims_for(pr, 0, 1), init);
  const auto& train = pr.split.train;
  const auto g = exact_gradient(pr, params, train).gradient;
  // (PX)^T (softmax(PXW) - Y) / |train| by explicit loops.
  const Dense px = testing::dense_mul(testing::dense_propagation(pr.graph), testing::to_dense(pr.features));
  const Dense probs = oracle_forward(pr, params);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (NodeId v : train) {
        const double y = pr.split.labels[v] == static_cast<std::int32_t>(c) ? 1.0 : 0.0;
        s += px[v][j] * (probs[v][c] - y);
      }
      EXPECT_NEAR(g[0](j, c), s / static_cast<double>(train.size()), 1e-10);
    }
  }
}

TEST_F(CveFixture, MatchesFiniteDifferencesOnFixedPlanAndMasks) {
  std::mt19937_64 gen(12);
  const HistoricalCache cache = random_cache(gen);
  SamplerConfig cfg;
  cfg.neighbors = 2;
  Rng rng(13);
  const std::vector<NodeId> batch{0, 3, 3, 7, 10};
  const auto plan = build_plan(pr_.graph, pr_.propagation, batch, 2, cfg, rng);
  const Rng mask_seed(14);
  auto run = [&](const ModelParams& w) {
    Rng r = mask_seed;  // identical masks on every evaluation
    return forward_cve(plan, pr_, w, cache, DropoutSpec{0.4, &r});
  };
  const double wd = 1e-3;
  const Gradient analytic = backward(run(params_), pr_.split.labels, params_, wd);
  const auto loss = [&](const ModelParams& w) {
    return minibatch_loss(run(w), pr_.split.labels) + 0.5 * wd * squared_norm(w.weights);
  };
  const Gradient numeric = finite_difference_gradient(loss, params_, 1e-5);
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    for (std::size_t j = 0; j < analytic[k].size(); ++j) {
      const double a = analytic[k].data()[j], n = numeric[k].data()[j];
      EXPECT_LE(std::abs(a - n), 1e-5 * std::max({std::abs(a), std::abs(n), 1e-7})) << k << ":" << j;
    }
  }
}

TEST_F(CveFixture, FullBatchFullSamplingPrimedCacheGivesExactObjectiveGradient) {
  const HistoricalCache cache = init_cache(pr_, params_);
  const auto& train = pr_.split.train;
  const auto plan = build_full_plan(pr_.graph, pr_.propagation, train, 2);
  const Gradient g = backward(forward_cve(plan, pr_, params_, cache), pr_.split.labels, params_);
  const auto f = [&](const ModelParams& w) {
    return minibatch_loss(forward_exact_trace(pr_, w, train), pr_.split.labels);
  };
  const Gradient numeric = finite_difference_gradient(f, params_, 1e-5);
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t j = 0; j < g[k].size(); ++j) {
      const double a = g[k].data()[j], n = numeric[k].data()[j];
      EXPECT_LE(std::abs(a - n), 1e-5 * std::max({std::abs(a), std::abs(n), 1e-7}));
    }
  }
}

TEST(Backward, FiniteOnRandomInstances) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 30; ++trial) {
    const Problem pr = random_problem(15, 0.2, 5, 4, gen);
    Rng init(static_cast<std::uint64_t>(trial));
    const ModelParams params = ModelParams::glorot(dims_for(pr, 8, 3), init);
    SamplerConfig cfg;
    cfg.neighbors = 2;
    const auto batch = sample_minibatch(pr.split.train, 6, init);
    const auto plan = build_plan(pr.graph, pr.propagation, batch, 3, cfg, init);
    const auto trace = forward_cve(plan, pr, params, init_cache(pr, params), DropoutSpec{0.5, &init});
    for (const auto& g : backward(trace, pr.split.labels, params, 1e-3)) EXPECT_TRUE(all_finite(g));
  }
}

TEST(Cache, ZeroWeightsGiveZeroHidden) {
  std::mt19937_64 gen(16);
  const Problem pr = random_problem(8, 0.3, 3, 2, gen);
  const auto cache = init_cache(pr, ModelParams::zeros(dims_for(pr, 4, 3)));
  for (std::size_t k = 1; k < 3; ++k) {
    for (double v : cache.layer(k).values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Cache, SingleLayerHoldsOnlyFeatures) {
  std::mt19937_64 gen(17);
  const Problem pr = random_problem(8, 0.3, 3, 2, gen);
  const auto cache = init_cache(pr, ModelParams::zeros(dims_for(pr, 4, 1)));
  EXPECT_EQ(cache.num_layers(), 1u);
  EXPECT_EQ(&cache.layer(0), &pr.features);
}

TEST_F(CveFixture, InitCacheMatchesTruncatedExactPass) {
  const auto cache = init_cache(pr_, params_);
  const Dense p = testing::dense_propagation(pr_.graph);
  const Dense pxw = testing::dense_mul(testing::dense_mul(p, testing::to_dense(pr_.features)),
                                       testing::to_dense(params_.weights[0]));
  for (std::size_t v = 0; v < pxw.size(); ++v) {
    for (std::size_t c = 0; c < pxw[v].size(); ++c) {
      EXPECT_NEAR(cache.layer(1)(v, c), std::max(pxw[v][c], 0.0), 1e-12);
    }
  }
  const auto linear = init_cache(pr_, params_, CacheInit::kLinear);
  for (std::size_t v = 0; v < pxw.size(); ++v) {
    for (std::size_t c = 0; c < pxw[v].size(); ++c) EXPECT_NEAR(linear.layer(1)(v, c), pxw[v][c], 1e-12);
  }
}

TEST_F(CveFixture, UpdateCopiesRowsAndIsIdempotent) {
  std::mt19937_64 gen(18);
  HistoricalCache cache = random_cache(gen);
  SamplerConfig cfg;
  Rng rng(19);
  const std::vector<NodeId> batch{2, 5};
  const auto trace = forward_cve(build_plan(pr_.graph, pr_.propagation, batch, 2, cfg, rng), pr_, params_, cache);
  update_cache(cache, trace);
  const auto& field = trace.plan.fields[1];
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto want = trace.layers[0].out.row(i);
    const auto got = cache.layer(1).row(field[i]);
    EXPECT_TRUE(std::equal(want.begin(), want.end(), got.begin()));
  }
  HistoricalCache twice = cache;
  update_cache(twice, trace);
  EXPECT_EQ(twice, cache);
}

TEST_F(CveFixture, EmptyFieldLeavesCacheUnchanged) {
  std::mt19937_64 gen(20);
  HistoricalCache cache = random_cache(gen);
  const HistoricalCache before = cache;
  ForwardTrace empty;
  empty.plan.fields.assign(3, {});
  empty.layers.resize(2);
  empty.layers[0].out = Matrix(0, params_.dims[1]);
  update_cache(cache, empty);
  EXPECT_EQ(cache, before);
}

TEST_F(CveFixture, FullPassLeavesExactActivationsInCache) {
  std::mt19937_64 gen(21);
  HistoricalCache cache = random_cache(gen);
  const auto nodes = all_nodes(pr_);
  const auto trace = forward_cve(build_full_plan(pr_.graph, pr_.propagation, nodes, 2), pr_, params_, cache);
  update_cache(cache, trace);
  const auto exact = init_cache(pr_, params_);
  EXPECT_LE(max_abs_diff(cache.layer(1), exact.layer(1)), 1e-12);
}

// Second iteration with unchanged W sees Delta H = 0 on every row the first one touched.
void two_step_replay(std::size_t layers, double tol) {
  std::mt19937_64 gen(22);
  const Problem pr = random_problem(20, 0.2, 4, 3, gen);
  Rng init(23);
  const ModelParams params = ModelParams::glorot(dims_for(pr, 5, layers), init);
  MatrixList hidden;
  for (std::size_t k = 1; k < layers; ++k) hidden.push_back(random_matrix(20, 5, gen));
  HistoricalCache cache(pr.features, hidden);
  const std::vector<NodeId> batch{1, 6, 13};
  const auto plan = build_full_plan(pr.graph, pr.propagation, batch, layers);
  update_cache(cache, forward_cve(plan, pr, params, cache));
  const auto second = forward_cve(plan, pr, params, cache);
  for (std::size_t k = 1; k < layers; ++k) {
    const auto& field = plan.fields[k];
    for (std::size_t i = 0; i < field.size(); ++i) {
      const auto h = second.layers[k - 1].out.row(i);
      const auto hb = cache.layer(k).row(field[i]);
      for (std::size_t c = 0; c < h.size(); ++c) EXPECT_LE(std::abs(h[c] - hb[c]), tol);
    }
  }
}

TEST(Cache, TwoStepReplayTwoLayersIsExact) { two_step_replay(2, 0.0); }
TEST(Cache, TwoStepReplayThreeLayers) { two_step_replay(3, 1e-12); }

TEST(Dropout, IdentityCases) {
  std::mt19937_64 gen(24);
  const Matrix m = random_matrix(4, 5, gen);
  Rng rng(1);
  const Rng before = rng;
  auto [out0, mask0] = apply_dropout(m, 0.0, rng, true);
  EXPECT_EQ(out0, m);
  EXPECT_EQ(mask0, Matrix(4, 5, 1.0));
  auto [out1, mask1] = apply_dropout(m, 0.7, rng, false);
  EXPECT_EQ(out1, m);
  EXPECT_EQ(mask1, Matrix(4, 5, 1.0));
  EXPECT_EQ(rng, before);
  EXPECT_THROW(apply_dropout(m, 1.0, rng, true), std::invalid_argument);
  EXPECT_THROW(apply_dropout(m, -0.1, rng, true), std::invalid_argument);
}

TEST(Dropout, SurvivorFractionAndMeanPreserved) {
  const std::size_t n = 1000000;
  std::mt19937_64 gen(25);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Matrix m(1000, 1000);
  for (double& x : m.values()) x = u(gen);
  Rng rng(26);
  auto [out, mask] = apply_dropout(m, 0.5, rng, true);
  std::size_t kept = 0;
  double in_mean = 0.0, out_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kept += mask.data()[i] != 0.0;
    in_mean += m.data()[i];
    out_mean += out.data()[i];
  }
  const double se = std::sqrt(0.25 / static_cast<double>(n));
  EXPECT_NEAR(static_cast<double>(kept) / static_cast<double>(n), 0.5, 3.0 * se);
  EXPECT_NEAR(out_mean / in_mean, 1.0, 0.01);
}

}  // namespace
}  // namespace cvegnn
