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

#include "fairdiff/baselines/multivae.hpp"
#include "fairdiff/dataset.hpp"
#include "fairdiff/diffusion.hpp"
#include "test_util.hpp"

namespace fairdiff {
namespace {

// Denoiser whose output is x_t itself: one identity layer on the x_t block,
// zero on the timestep embedding.
Mlp PassThrough(int dim, int emb_dim) {
  DenseLayer layer;
  layer.weight = Matrix::Zero(dim + emb_dim, dim);
  layer.weight.topRows(dim) = Matrix::Identity(dim, dim);
  layer.bias = Matrix::Zero(1, dim);
  return Mlp({layer});
}

Matrix BinaryMatrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.Uniform() < 0.3 ? 1.0 : 0.0;
  return m;
}

TEST(Schedule, SingleStep) {
  const NoiseSchedule s(1, 0.5, 0.01, 0.02);
  EXPECT_DOUBLE_EQ(s.beta(1), 0.5 * 0.01);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0 - 0.5 * 0.01);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
}

TEST(Schedule, TinyScaleBarelyCorrupts) {
  const NoiseSchedule s(50, 1e-12, 1e-4, 0.02);
  EXPECT_NEAR(s.alpha_bar(50), 1.0, 1e-10);
}

TEST(Schedule, FiveStepsMatchDirectProduct) {
  const NoiseSchedule s(5, 0.1, 1e-4, 0.02);
  double product = 1.0;
  for (int t = 1; t <= 5; ++t) {
    const double beta = 0.1 * (1e-4 + (t - 1) / 4.0 * (0.02 - 1e-4));
    EXPECT_NEAR(s.beta(t), beta, 1e-18);
    product *= 1.0 - beta;
  }
  EXPECT_NEAR(s.alpha_bar(5), product, 1e-15);
}

TEST(Schedule, PreconditionsAreChecked) {
  EXPECT_THROW(NoiseSchedule(0, 0.1, 1e-4, 0.02), ConfigError);
  EXPECT_THROW(NoiseSchedule(5, 0.1, 0.03, 0.02), ConfigError);
  EXPECT_THROW(NoiseSchedule(5, 0.0, 1e-4, 0.02), ConfigError);
  EXPECT_THROW(NoiseSchedule(5, 100.0, 1e-4, 0.02), ConfigError);
}

TEST(QSample, EndpointsAndZeroNoise) {
  const NoiseSchedule s(5, 0.1, 1e-4, 0.02);
  Vector x0(3), eps(3);
  x0 << 1, 0, 1;
  eps << 0.3, -1.2, 0.8;
  EXPECT_EQ(QSample(x0, 0, eps, s), x0);
  const Vector noiseless = QSample(x0, 4, Vector::Zero(3), s);
  EXPECT_TRUE(noiseless.isApprox(std::sqrt(s.alpha_bar(4)) * x0, 1e-15));
}

TEST(DiffusionLoss, OracleDenoiserHasZeroLoss) {
  // A denoiser that outputs x0 for every input: zero weights, x0 as bias (one row).
  const NoiseSchedule s(5, 0.1, 1e-4, 0.02);
  Matrix x0(1, 4);
  x0 << 1, 0, 0, 1;
  DenseLayer layer{Matrix::Zero(4 + 6, 4), x0, Activation::kIdentity};
  Mlp oracle({layer});
  Rng rng(1);
  EXPECT_EQ(DiffusionLoss(oracle, s, 6, x0, rng), 0.0);
}

TEST(DiffusionLoss, MatchesReferenceOnSharedDraw) {
  const NoiseSchedule s(5, 0.1, 5e-3, 1e-2);
  Rng init(2);
  const Mlp net = DiffRecModel::MakeDenoiser(12, {16}, 10, init);
  const Matrix x0 = BinaryMatrix(7, 12, init);
  Rng a(3), b(3);
  const double loss = DiffusionLoss(net, s, 10, x0, a);
  // independent re-computation with the same stream
  std::vector<int> steps(7);
  for (auto& t : steps) t = 1 + static_cast<int>(b.Below(5));
  Matrix eps(7, 12);
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = b.Normal();
  double total = 0;
  for (Eigen::Index r = 0; r < 7; ++r) {
    const double ab = s.alpha_bar(steps[static_cast<std::size_t>(r)]);
    Matrix in(1, 22);
    in.leftCols(12) = std::sqrt(ab) * x0.row(r) + std::sqrt(1 - ab) * eps.row(r);
    in.rightCols(10) = TimestepEmbedding(steps[static_cast<std::size_t>(r)], 10);
    total += (net.Forward(in) - x0.row(r)).squaredNorm();
  }
  const double reference = total / static_cast<double>(x0.size());
  EXPECT_GE(loss, 0.9 * reference);
  EXPECT_LE(loss, 1.1 * reference);
  EXPECT_NEAR(loss, reference, 1e-12);
}

TEST(DiffusionLoss, GradientMatchesFiniteDifferences) {
  const NoiseSchedule s(5, 0.1, 5e-3, 1e-2);
  Rng rng(4);
  Mlp net = DiffRecModel::MakeDenoiser(6, {5}, 4, rng);
  const Matrix x0 = BinaryMatrix(4, 6, rng);
  const std::vector<int> steps = {1, 3, 5, 2};
  const Matrix eps = StandardNormal(4, 6, rng);
  auto params = net.parameters();
  const Vector start = Flatten(std::vector<const Matrix*>(params.begin(), params.end()));
  LossFn loss = [&](const Vector& p, Vector* grad) {
    Unflatten(p, net.parameters());
    if (grad == nullptr) return DiffusionLoss(net, s, 4, x0, steps, eps);
    auto g = net.ZeroGradients();
    const double v = DiffusionLoss(net, s, 4, x0, steps, eps, &g);
    *grad = Flatten(net.GradientRefs(g));
    return v;
  };
  EXPECT_LT(GradCheck(loss, start), 1e-5);
}

TEST(DiffusionStep, InputGradientMatchesFiniteDifferences) {
  const NoiseSchedule s(5, 0.5, 5e-3, 1e-2);
  Rng rng(5);
  const Mlp net = DiffRecModel::MakeDenoiser(3, {4}, 4, rng);
  const std::vector<int> steps = {2, 5};
  const Matrix eps = StandardNormal(2, 3, rng);
  LossFn loss = [&](const Vector& p, Vector* grad) {
    const Matrix x0 = Eigen::Map<const Matrix>(p.data(), 2, 3);
    DiffusionStep step(net, s, 4, x0, steps, eps);
    if (grad != nullptr) {
      auto g = net.ZeroGradients();
      const Matrix d = step.Backward(g);
      *grad = Eigen::Map<const Vector>(d.data(), d.size());
    }
    return step.loss();
  };
  Vector start(6);
  start << 0.2, -0.4, 0.9, 1.1, 0.0, -0.3;
  EXPECT_LT(GradCheck(loss, start), 1e-5);
}

TEST(ReverseDenoise, ZeroStepsIsOneDenoiserCall) {
  const NoiseSchedule s(5, 0.1, 5e-3, 1e-2);
  Rng rng(6);
  const Mlp net = DiffRecModel::MakeDenoiser(5, {7}, 4, rng);
  const Matrix x = BinaryMatrix(3, 5, rng);
  const Matrix direct = net.Forward(DenoiserInput(x, std::vector<int>(3, 0), 4));
  EXPECT_EQ(ReverseDenoise(net, s, 4, x, 0), direct);
}

TEST(ReverseDenoise, OracleDenoiserIsAFixedPointForEveryTPrime) {
  // oracle: predicts x whatever the input
  const NoiseSchedule s(5, 0.1, 5e-3, 1e-2);
  Rng rng(7);
  const Matrix x = BinaryMatrix(4, 6, rng);
  for (int tp = 0; tp <= 5; ++tp) {
    DenseLayer layer{Matrix::Zero(6 + 4, 6), Matrix(x.row(0)), Activation::kIdentity};
    const Mlp oracle({layer});
    const Matrix out = ReverseDenoise(oracle, s, 4, Matrix(x.row(0)), tp);
    EXPECT_TRUE(out.isApprox(x.row(0), 1e-15)) << tp;
  }
  // and the identity-on-x_t denoiser gives x at T' = 0
  EXPECT_TRUE(ReverseDenoise(PassThrough(6, 4), s, 4, x, 0).isApprox(x, 1e-15));
}

TEST(ReverseDenoise, OneStepMatchesHandExpansion) {
  const NoiseSchedule s(5, 0.3, 5e-3, 1e-2);
  Rng rng(8);
  const Mlp net = DiffRecModel::MakeDenoiser(4, {5}, 6, rng);
  const Matrix x = BinaryMatrix(2, 4, rng);
  // T' = 1: x_1 = sqrt(ab_1) x, x0_hat = f(x_1, 1); the returned value is f(x_1, 1).
  const Matrix x1 = std::sqrt(1.0 - 0.3 * 5e-3) * x;
  Matrix in(2, 10);
  in.leftCols(4) = x1;
  for (int r = 0; r < 2; ++r) {
    in(r, 4) = std::cos(1.0);
    in(r, 5) = std::cos(1.0 * std::exp(-std::log(10000.0) / 3));
    in(r, 6) = std::cos(1.0 * std::exp(-2 * std::log(10000.0) / 3));
    in(r, 7) = std::sin(1.0);
    in(r, 8) = std::sin(1.0 * std::exp(-std::log(10000.0) / 3));
    in(r, 9) = std::sin(1.0 * std::exp(-2 * std::log(10000.0) / 3));
  }
  EXPECT_TRUE(ReverseDenoise(net, s, 6, x, 1).isApprox(net.Forward(in), 1e-14));
  EXPECT_THROW(ReverseDenoise(net, s, 6, x, 6), ConfigError);
}

TEST(ReverseDenoise, TwoStepsFollowPosteriorMean) {
  const NoiseSchedule s(5, 0.3, 5e-3, 1e-2);
  Rng rng(9);
  const Mlp net = DiffRecModel::MakeDenoiser(4, {5}, 6, rng);
  const Matrix x = BinaryMatrix(3, 4, rng);
  auto f = [&](const Matrix& xt, int t) { return net.Forward(DenoiserInput(xt, std::vector<int>(3, t), 6)); };
  const Matrix x2 = std::sqrt(s.alpha_bar(2)) * x;
  const Matrix h2 = f(x2, 2);
  const double c1 = std::sqrt(s.alpha_bar(1)) * s.beta(2) / (1 - s.alpha_bar(2));
  const double c2 = std::sqrt(1 - s.beta(2)) * (1 - s.alpha_bar(1)) / (1 - s.alpha_bar(2));
  const Matrix x1 = c1 * h2 + c2 * x2;
  EXPECT_TRUE(ReverseDenoise(net, s, 6, x, 2).isApprox(f(x1, 1), 1e-14));
}

TEST(DiffRec, SameSeedSameCheckpoint) {
  testing::TempDir dir;
  const SplitDataset split = TemporalSplit(GenerateSynthetic({.n_users = 40, .n_items = 25, .density = 0.2}));
  DiffRecParams hp;
  hp.hidden = {16};
  hp.epochs = 3;
  hp.batch = 16;
  const auto train = split.Rows(Phase::kTrain);
  FitDiffRec(train, split.num_items(), hp, 5).Save(dir / "a");
  FitDiffRec(train, split.num_items(), hp, 5).Save(dir / "b");
  std::ifstream a(dir / "a", std::ios::binary), b(dir / "b", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
  const auto loaded = DiffRecModel::FromCheckpoint(Checkpoint::Load(dir / "a"));
  EXPECT_EQ(loaded.denoiser(), FitDiffRec(train, split.num_items(), hp, 5).denoiser());
}

TEST(DiffRec, TrainingReducesLoss) {
  const SplitDataset split = TemporalSplit(GenerateSynthetic({.n_users = 200, .n_items = 60, .density = 0.1}));
  DiffRecParams hp;
  hp.hidden = {64};
  hp.epochs = 20;
  hp.batch = 50;
  std::vector<double> curve;
  FitDiffRec(split.Rows(Phase::kTrain), split.num_items(), hp, 1, &curve);
  ASSERT_EQ(curve.size(), 20u);
  EXPECT_LT(curve.back(), 0.8 * curve.front());
}

}  // namespace
}  // namespace fairdiff
