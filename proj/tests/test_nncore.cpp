// Copyright 2026 The FairDiff Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fairdiff/errors.hpp"
#include "fairdiff/nncore.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {
namespace {

Matrix RandomMatrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = 2.0 * rng.Uniform() - 1.0;
  return m;
}

DenseLayer Layer(Matrix w, Matrix b, Activation a) { return {std::move(w), std::move(b), a}; }

TEST(Mlp, IdentityLayerPassesThrough) {
  Mlp net({Layer(Matrix::Identity(3, 3), Matrix::Zero(1, 3), Activation::kIdentity)});
  Rng rng(1);
  const Matrix x = RandomMatrix(4, 3, rng);
  EXPECT_EQ(net.Forward(x), x);
}

TEST(Mlp, ZeroWeightsGiveBias) {
  Matrix bias(1, 2);
  bias << 0.5, -2.0;
  Mlp net({Layer(Matrix::Zero(3, 2), bias, Activation::kIdentity)});
  Rng rng(2);
  const Matrix out = net.Forward(RandomMatrix(5, 3, rng));
  for (Eigen::Index r = 0; r < 5; ++r) EXPECT_EQ(out.row(r), bias);
}

TEST(Mlp, TwoTwoOneTanhMatchesHandEvaluation) {
  Matrix w1(2, 2), b1(1, 2), w2(2, 1), b2(1, 1);
  w1 << 0.1, -0.2, 0.3, 0.4;
  b1 << 0.05, -0.05;
  w2 << 0.7, -0.6;
  b2 << 0.2;
  Mlp net({Layer(w1, b1, Activation::kTanh), Layer(w2, b2, Activation::kTanh)});
  const double x0 = 0.9, x1 = -1.1;
  const double h0 = std::tanh(0.1 * x0 + 0.3 * x1 + 0.05);
  const double h1 = std::tanh(-0.2 * x0 + 0.4 * x1 - 0.05);
  const double expected = std::tanh(0.7 * h0 - 0.6 * h1 + 0.2);
  Vector x(2);
  x << x0, x1;
  EXPECT_NEAR(net.Forward(x)[0], expected, 1e-15);
}

TEST(Mlp, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng(3);
  Mlp net({4, 5, 3}, Activation::kTanh, Activation::kIdentity, rng);
  Mlp::Cache cache;
  net.Forward(RandomMatrix(2, 4, rng), &cache);
  auto grads = net.ZeroGradients();
  const Matrix dx = net.Backward(cache, Matrix::Zero(2, 3), grads);
  EXPECT_TRUE(dx.isZero(0));
  for (const Matrix* g : net.GradientRefs(grads)) EXPECT_TRUE(g->isZero(0));
}

TEST(Mlp, LinearLeastSquaresGradientIsClosedForm) {
  Rng rng(4);
  Mlp net({3, 2}, Activation::kIdentity, Activation::kIdentity, rng);
  const Matrix x = RandomMatrix(6, 3, rng), y = RandomMatrix(6, 2, rng);
  Mlp::Cache cache;
  const Matrix out = net.Forward(x, &cache);
  auto grads = net.ZeroGradients();
  // loss = 0.5 |XW + b - Y|^2  =>  dW = X^T R, db = 1^T R
  const Matrix residual = out - y;
  net.Backward(cache, residual, grads);
  EXPECT_TRUE(grads.weight[0].isApprox(x.transpose() * residual, 1e-12));
  EXPECT_TRUE(grads.bias[0].isApprox(residual.colwise().sum(), 1e-12));
}

TEST(Mlp, ThreeLayerGradientMatchesFiniteDifferences) {
  for (auto act : {Activation::kTanh, Activation::kRelu}) {
    Rng rng(5);
    Mlp net({5, 7, 6, 3}, act, Activation::kTanh, rng);
    const Matrix x = RandomMatrix(4, 5, rng), target = RandomMatrix(4, 3, rng);
    auto params = net.parameters();
    const Vector start = Flatten(std::vector<const Matrix*>(params.begin(), params.end()));
    LossFn loss = [&](const Vector& p, Vector* grad) {
      Unflatten(p, net.parameters());
      Mlp::Cache cache;
      const Matrix out = net.Forward(x, &cache);
      const Matrix diff = out - target;
      if (grad != nullptr) {
        auto g = net.ZeroGradients();
        net.Backward(cache, diff, g);
        *grad = Flatten(net.GradientRefs(g));
      }
      return 0.5 * diff.squaredNorm();
    };
    EXPECT_LT(GradCheck(loss, start), 1e-6) << ActivationName(act);
  }
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
  Rng rng(6);
  Mlp net({3, 4, 2}, Activation::kTanh, Activation::kIdentity, rng);
  const Matrix weights = RandomMatrix(2, 2, rng);
  LossFn loss = [&](const Vector& p, Vector* grad) {
    const Matrix x = Eigen::Map<const Matrix>(p.data(), 2, 3);
    Mlp::Cache cache;
    const Matrix out = net.Forward(x, &cache);
    if (grad != nullptr) {
      auto g = net.ZeroGradients();
      const Matrix dx = net.Backward(cache, weights, g);
      *grad = Eigen::Map<const Vector>(dx.data(), dx.size());
    }
    return out.cwiseProduct(weights).sum();
  };
  EXPECT_LT(GradCheck(loss, RandomMatrix(6, 1, rng)), 1e-6);
}

TEST(Mlp, StaleCacheIsRejected) {
  Rng rng(7);
  Mlp net({2, 2}, Activation::kTanh, Activation::kIdentity, rng);
  Mlp::Cache cache;
  net.Forward(RandomMatrix(1, 2, rng), &cache);
  net.parameters();  // mutable access invalidates caches
  auto grads = net.ZeroGradients();
  EXPECT_THROW(net.Backward(cache, Matrix::Ones(1, 2), grads), DimensionError);
}

TEST(GradCheck, QuadraticIsExact) {
  LossFn loss = [](const Vector& p, Vector* grad) {
    if (grad != nullptr) *grad = 2.0 * p;
    return p.squaredNorm();
  };
  Vector p(4);
  p << 1.0, -2.0, 0.5, 3.0;
  EXPECT_LT(GradCheck(loss, p), 1e-8);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Matrix p = Matrix::Constant(2, 2, 0.3);
  const Matrix g = Matrix::Zero(2, 2);
  AdamState state;
  std::vector<Matrix*> params = {&p};
  std::vector<const Matrix*> grads = {&g};
  AdamUpdate(params, grads, state);
  EXPECT_EQ(p, Matrix::Constant(2, 2, 0.3));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Matrix p(1, 3), g(1, 3);
  p << 1.0, 1.0, 1.0;
  g << 0.5, -2.0, 1e-3;
  AdamState state;
  state.options.lr = 0.01;
  std::vector<Matrix*> params = {&p};
  std::vector<const Matrix*> grads = {&g};
  AdamUpdate(params, grads, state);
  // t = 1: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps)
  for (int k = 0; k < 3; ++k) {
    const double expected = 1.0 - 0.01 * g(0, k) / (std::abs(g(0, k)) + 1e-8);
    EXPECT_NEAR(p(0, k), expected, 1e-12);
  }
}

TEST(Adam, DeterministicAndRejectsNonFinite) {
  auto run = [] {
    Matrix p = Matrix::Constant(2, 3, 0.1);
    Matrix g = Matrix::Constant(2, 3, 0.2);
    AdamState state;
    std::vector<Matrix*> params = {&p};
    std::vector<const Matrix*> grads = {&g};
    for (int i = 0; i < 5; ++i) AdamUpdate(params, grads, state);
    return p;
  };
  EXPECT_EQ(run(), run());
  Matrix p = Matrix::Zero(1, 1), g(1, 1);
  g << std::nan("");
  AdamState state;
  std::vector<Matrix*> params = {&p};
  std::vector<const Matrix*> grads = {&g};
  EXPECT_THROW(AdamUpdate(params, grads, state), DivergenceError);
}

TEST(LogSoftmax, RowsNormalise) {
  Rng rng(8);
  const Matrix logits = 50.0 * RandomMatrix(3, 6, rng);
  const Matrix lsm = LogSoftmax(logits);
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_NEAR(lsm.row(r).array().exp().sum(), 1.0, 1e-12);
}

TEST(Rng, StreamsAreReproducibleAndIndependent) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
  EXPECT_NE(Rng(42).Split("x").NextU64(), Rng(42).Split("y").NextU64());
  Rng r(1);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) ++hist[r.Below(5)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 400);
}

}  // namespace
}  // namespace fairdiff
