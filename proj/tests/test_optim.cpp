// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cvegnn/optim.hpp"

namespace cvegnn {
namespace {

ModelParams scalar(double w) {
  ModelParams p = ModelParams::zeros({1, 1});
  p.weights[0](0, 0) = w;
  return p;
}

Gradient scalar_grad(double g) { return Gradient{Matrix(1, 1, g)}; }

OptimizerConfig make(OptimizerKind kind, double lr, double beta1 = 0.0) {
  OptimizerConfig c = OptimizerConfig::defaults_for(kind);
  c.lr = lr;
  c.beta1 = beta1;
  return c;
}

ModelParams random_params(std::mt19937_64& rng) {
  ModelParams p = ModelParams::zeros({4, 3, 2});
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& w : p.weights) {
    for (double& x : w.values()) x = n(rng);
  }
  return p;
}

Gradient random_grad(const ModelParams& p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Gradient g;
  for (const auto& w : p.weights) {
    Matrix m(w.rows(), w.cols());
    for (double& x : m.values()) x = n(rng);
    g.push_back(m);
  }
  return g;
}

TEST(Sgd, SingleStep) {
  ModelParams p = scalar(1.0);
  Optimizer opt(make(OptimizerKind::kSgd, 0.1), p);
  opt.step(p, scalar_grad(2.0));
  EXPECT_DOUBLE_EQ(p.weights[0](0, 0), 1.0 - 0.2);
}

TEST(Sgd, ReducesToPlainGradientStepBitwise) {
  std::mt19937_64 rng(1);
  ModelParams p = random_params(rng);
  ModelParams q = p;
  OptimizerConfig c = make(OptimizerKind::kSgd, 0.037);
  c.eps = 0.5;  // irrelevant for sgd
  Optimizer opt(c, p);
  for (int t = 0; t < 20; ++t) {
    const Gradient g = random_grad(p, rng);
    opt.step(p, g);
    for (std::size_t k = 0; k < q.weights.size(); ++k) {
      for (std::size_t j = 0; j < g[k].size(); ++j) q.weights[k].data()[j] -= 0.037 * g[k].data()[j];
    }
    ASSERT_EQ(p.weights, q.weights);
  }
}

TEST(HeavyBall, RecurrenceArithmetic) {
  ModelParams p = scalar(0.0);
  Optimizer opt(make(OptimizerKind::kHeavyBall, 1.0, 0.9), p);
  opt.step(p, scalar_grad(1.0));
  EXPECT_NEAR(opt.state().m[0](0, 0), 0.1, 1e-15);
  opt.step(p, scalar_grad(1.0));
  EXPECT_NEAR(opt.state().m[0](0, 0), 0.19, 1e-15);
  EXPECT_NEAR(-p.weights[0](0, 0), 0.29, 1e-15);
}

TEST(HeavyBall, MomentMatchesDirectSummation) {
  std::mt19937_64 rng(2);
  ModelParams p = random_params(rng);
  const double b1 = 0.9;
  Optimizer opt(make(OptimizerKind::kHeavyBall, 0.01, b1), p);
  std::vector<Gradient> history;
  for (int t = 1; t <= 10; ++t) {
    history.push_back(random_grad(p, rng));
    opt.step(p, history.back());
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      for (std::size_t j = 0; j < p.weights[k].size(); ++j) {
        double m = 0.0;
        for (int i = 1; i <= t; ++i) m += std::pow(b1, t - i) * history[i - 1][k].data()[j];
        EXPECT_NEAR(opt.state().m[k].data()[j], (1.0 - b1) * m, 1e-12);
      }
    }
  }
}

TEST(Amsgrad, ZeroGradientKeepsSecondMoment) {
  ModelParams p = scalar(0.0);
  Optimizer opt(make(OptimizerKind::kAmsgrad, 0.1, 0.9), p);
  opt.step(p, scalar_grad(2.0));
  const double v1 = opt.state().v[0](0, 0);
  EXPECT_NEAR(v1, 0.001 * 4.0, 1e-15);
  opt.step(p, scalar_grad(0.0));
  EXPECT_EQ(opt.state().v[0](0, 0), v1);
}

TEST(Amsgrad, SecondMomentNeverDecreases) {
  std::mt19937_64 rng(3);
  ModelParams p = random_params(rng);
  Optimizer opt(make(OptimizerKind::kAmsgrad, 0.01, 0.9), p);
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  MatrixList prev = opt.state().v;
  for (int t = 0; t < 1000; ++t) {
    opt.step(p, random_grad(p, rng, scale(rng)));
    for (std::size_t k = 0; k < prev.size(); ++k) {
      for (std::size_t j = 0; j < prev[k].size(); ++j) ASSERT_GE(opt.state().v[k].data()[j], prev[k].data()[j]);
    }
    prev = opt.state().v;
  }
}

TEST(Adagrad, MeanOfSquares) {
  ModelParams p = scalar(0.0);
  Optimizer opt(make(OptimizerKind::kAdagrad, 0.1, 0.9), p);
  opt.step(p, scalar_grad(2.0));
  opt.step(p, scalar_grad(1.0));
  EXPECT_DOUBLE_EQ(opt.state().v[0](0, 0), 2.5);
}

TEST(Adagrad, MatchesDirectRecomputation) {
  std::mt19937_64 rng(4);
  ModelParams p = random_params(rng);
  Optimizer opt(make(OptimizerKind::kAdagrad, 0.01, 0.9), p);
  std::vector<Gradient> history;
  for (int t = 1; t <= 25; ++t) {
    history.push_back(random_grad(p, rng));
    opt.step(p, history.back());
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      for (std::size_t j = 0; j < p.weights[k].size(); ++j) {
        double s = 0.0;
        for (const auto& g : history) s += g[k].data()[j] * g[k].data()[j];
        EXPECT_NEAR(opt.state().v[k].data()[j], s / t, 1e-12);
      }
    }
  }
}

TEST(Adam, FirstStepWithoutBiasCorrection) {
  const double alpha = 0.01;
  for (double g : {0.5, 3.0}) {
    ModelParams p = scalar(0.0);
    OptimizerConfig c = make(OptimizerKind::kAdam, alpha, 0.9);
    c.eps = 0.0;
    Optimizer opt(c, p);
    opt.step(p, scalar_grad(g));
    EXPECT_NEAR(p.weights[0](0, 0), -alpha * 0.1 / std::sqrt(0.001), 1e-12);
    EXPECT_NEAR(p.weights[0](0, 0), -3.16228 * alpha, 1e-6);
  }
}

TEST(Adam, BiasCorrectedFirstStepIsSignStep) {
  ModelParams p = scalar(0.0);
  OptimizerConfig c = make(OptimizerKind::kAdam, 0.01, 0.9);
  c.eps = 0.0;
  c.adam_bias_correction = true;
  Optimizer opt(c, p);
  opt.step(p, scalar_grad(-4.0));
  EXPECT_NEAR(p.weights[0](0, 0), 0.01, 1e-15);
}

TEST(AllKinds, MomentBoundedByGradientBound) {
  std::mt19937_64 rng(5);
  const double c = 0.7;
  for (auto kind : {OptimizerKind::kHeavyBall, OptimizerKind::kAdam, OptimizerKind::kAmsgrad,
                    OptimizerKind::kAdagrad}) {
    ModelParams p = random_params(rng);
    Optimizer opt(make(kind, 0.01, 0.9), p);
    for (int t = 0; t < 300; ++t) {
      Gradient g = random_grad(p, rng, 2.0);
      for (auto& m : g) {
        for (double& x : m.values()) x = std::clamp(x, -c, c);
      }
      opt.step(p, g);
      ASSERT_LE(max_abs(opt.state().m), c);
    }
  }
}

TEST(AllKinds, NonFiniteGradientRejectedBeforeMutation) {
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kHeavyBall, OptimizerKind::kAdam, OptimizerKind::kAmsgrad,
                    OptimizerKind::kAdagrad}) {
    ModelParams p = ModelParams::zeros({2, 2});
    Optimizer opt(OptimizerConfig::defaults_for(kind), p);
    opt.step(p, Gradient{Matrix(2, 2, 0.5)});
    const ModelParams before = p;
    const auto t_before = opt.state().t;
    Gradient bad{Matrix(2, 2, 0.1)};
    bad[0](1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(opt.step(p, bad), NonFiniteGradientError);
    EXPECT_EQ(p.weights, before.weights);
    EXPECT_EQ(opt.state().t, t_before);
  }
}

TEST(Config, Validation) {
  OptimizerConfig sgd = OptimizerConfig::defaults_for(OptimizerKind::kSgd);
  EXPECT_EQ(sgd.beta1, 0.0);
  sgd.beta1 = 0.9;
  EXPECT_THROW(sgd.validate(), std::invalid_argument);
  OptimizerConfig hb = OptimizerConfig::defaults_for(OptimizerKind::kHeavyBall);
  EXPECT_EQ(hb.beta1, 0.9);
  hb.adam_bias_correction = true;
  EXPECT_THROW(hb.validate(), std::invalid_argument);
  OptimizerConfig adam = OptimizerConfig::defaults_for(OptimizerKind::kAdam);
  EXPECT_EQ(adam.beta2, 0.999);
  EXPECT_EQ(adam.eps, 1e-8);
  adam.lr = 0.0;
  EXPECT_THROW(adam.validate(), std::invalid_argument);
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kHeavyBall, OptimizerKind::kAdam, OptimizerKind::kAmsgrad,
                 OptimizerKind::kAdagrad}) {
    EXPECT_EQ(parse_optimizer_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_optimizer_kind("rmsprop"), std::invalid_argument);
}

TEST(AllKinds, ShapeMismatchRejected) {
  ModelParams p = ModelParams::zeros({2, 2});
  Optimizer opt(OptimizerConfig::defaults_for(OptimizerKind::kAdam), p);
  EXPECT_THROW(opt.step(p, Gradient{Matrix(3, 2)}), DimensionError);
}

}  // namespace
}  // namespace cvegnn
