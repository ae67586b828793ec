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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairdiff/baselines/multivae.hpp"
#include "fairdiff/checkpoint.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/nncore.hpp"
#include "fairdiff/recommender.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

// Linear noise schedule scaled by s. Steps are 1-based: beta(t) for
// t in [1, T]; alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  NoiseSchedule(int steps, double scale, double beta_min, double beta_max)
      : steps_(steps), scale_(scale), beta_min_(beta_min), beta_max_(beta_max) {
    if (steps < 1) throw ConfigError("noise schedule needs T >= 1");
    if (!(beta_min > 0) || beta_min > beta_max) {
      throw ConfigError("noise schedule needs 0 < beta_min <= beta_max");
    }
    if (!(scale > 0) || !(scale * beta_max < 1)) {
      throw ConfigError("noise schedule needs s > 0 and s * beta_max < 1");
    }
    beta_.resize(static_cast<std::size_t>(steps));
    alpha_bar_.assign(static_cast<std::size_t>(steps) + 1, 1.0);
    const double span = static_cast<double>(std::max(steps - 1, 1));
    for (int t = 1; t <= steps; ++t) {
      const double b = scale * (beta_min + static_cast<double>(t - 1) / span * (beta_max - beta_min));
      beta_[static_cast<std::size_t>(t - 1)] = b;
      alpha_bar_[static_cast<std::size_t>(t)] = alpha_bar_[static_cast<std::size_t>(t - 1)] * (1.0 - b);
    }
  }

  int steps() const { return steps_; }
  double scale() const { return scale_; }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }

  double beta(int t) const { return beta_.at(static_cast<std::size_t>(t - 1)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }

  // Coefficients of x0 and x_t in the mean of q(x_{t-1} | x_t, x0).
  double posterior_coef_x0(int t) const {
    return std::sqrt(alpha_bar(t - 1)) * beta(t) / (1.0 - alpha_bar(t));
  }
  double posterior_coef_xt(int t) const {
    return std::sqrt(alpha(t)) * (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t));
  }
  double posterior_variance(int t) const {
    return beta(t) * (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t));
  }

  friend bool operator==(const NoiseSchedule& a, const NoiseSchedule& b) {
    return a.steps_ == b.steps_ && a.scale_ == b.scale_ && a.beta_min_ == b.beta_min_ &&
           a.beta_max_ == b.beta_max_;
  }

 private:
  int steps_ = 0;
  double scale_ = 0, beta_min_ = 0, beta_max_ = 0;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

// Closed-form marginal of t forward steps: sqrt(ab_t) x0 + sqrt(1 - ab_t) eps.
inline Matrix QSample(const Matrix& x0, std::span<const int> steps, const Matrix& eps,
                      const NoiseSchedule& sched) {
  if (static_cast<Eigen::Index>(steps.size()) != x0.rows() || eps.rows() != x0.rows() ||
      eps.cols() != x0.cols()) {
    throw DimensionError("QSample: shape mismatch");
  }
  Matrix xt(x0.rows(), x0.cols());
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const int t = steps[static_cast<std::size_t>(r)];
    if (t < 0 || t > sched.steps()) throw ConfigError("QSample: t out of range");
    const double ab = sched.alpha_bar(t);
    xt.row(r) = std::sqrt(ab) * x0.row(r) + std::sqrt(1.0 - ab) * eps.row(r);
  }
  return xt;
}

inline Vector QSample(const Vector& x0, int t, const Vector& eps, const NoiseSchedule& sched) {
  Matrix x = x0.transpose();
  Matrix e = eps.transpose();
  return QSample(x, std::span<const int>(&t, 1), e, sched).row(0).transpose();
}

// Sinusoidal embedding: [cos(t f_k), sin(t f_k)], f_k = 10000^(-k/half).
inline RowVector TimestepEmbedding(int t, int dim) {
  RowVector emb = RowVector::Zero(dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    emb[k] = std::cos(t * freq);
    emb[half + k] = std::sin(t * freq);
  }
  return emb;
}

// Denoiser input: x_t with the timestep embedding appended.
inline Matrix DenoiserInput(const Matrix& xt, std::span<const int> steps, int emb_dim) {
  Matrix in(xt.rows(), xt.cols() + emb_dim);
  in.leftCols(xt.cols()) = xt;
  for (Eigen::Index r = 0; r < xt.rows(); ++r) {
    in.row(r).tail(emb_dim) = TimestepEmbedding(steps[static_cast<std::size_t>(r)], emb_dim);
  }
  return in;
}

// One training pass of the x0-prediction objective with explicit noise:
// loss = mean over rows and columns of (x0_hat - x0)^2. Backward accepts an
// extra gradient on x0_hat so callers can stack losses on the prediction.
class DiffusionStep {
 public:
  DiffusionStep(const Mlp& denoiser, const NoiseSchedule& sched, int emb_dim, const Matrix& x0,
                std::vector<int> steps, const Matrix& eps)
      : denoiser_(denoiser), sched_(sched), x0_(x0), steps_(std::move(steps)) {
    const Matrix xt = QSample(x0, steps_, eps, sched);
    prediction_ = denoiser.Forward(DenoiserInput(xt, steps_, emb_dim), &cache_);
    if (prediction_.cols() != x0.cols()) throw DimensionError("denoiser output dim mismatch");
    loss_ = (prediction_ - x0).squaredNorm() / static_cast<double>(x0.size());
  }

  double loss() const { return loss_; }
  const Matrix& prediction() const { return prediction_; }

  // Returns d(total)/d(x0), counting both the corrupted input and the target.
  Matrix Backward(MlpGradients& grads, const Matrix* d_prediction_extra = nullptr) const {
    Matrix d_pred = 2.0 * (prediction_ - x0_) / static_cast<double>(x0_.size());
    const Matrix d_mse_pred = d_pred;
    if (d_prediction_extra != nullptr) d_pred += *d_prediction_extra;
    const Matrix d_in = denoiser_.Backward(cache_, d_pred, grads);
    Matrix d_x0 = d_in.leftCols(x0_.cols());
    for (Eigen::Index r = 0; r < d_x0.rows(); ++r) {
      d_x0.row(r) *= std::sqrt(sched_.alpha_bar(steps_[static_cast<std::size_t>(r)]));
    }
    return d_x0 - d_mse_pred;
  }

 private:
  const Mlp& denoiser_;
  const NoiseSchedule& sched_;
  Matrix x0_;
  std::vector<int> steps_;
  Matrix prediction_;
  Mlp::Cache cache_;
  double loss_ = 0;
};

inline double DiffusionLoss(const Mlp& denoiser, const NoiseSchedule& sched, int emb_dim,
                            const Matrix& x0, std::vector<int> steps, const Matrix& eps,
                            MlpGradients* grads = nullptr) {
  DiffusionStep step(denoiser, sched, emb_dim, x0, std::move(steps), eps);
  if (!std::isfinite(step.loss())) throw DivergenceError("diffusion loss is not finite");
  if (grads != nullptr) step.Backward(*grads);
  return step.loss();
}

// Draws t ~ U{1..T} and eps ~ N(0, I) per row from rng.
inline double DiffusionLoss(const Mlp& denoiser, const NoiseSchedule& sched, int emb_dim,
                            const Matrix& x0, Rng& rng, MlpGradients* grads = nullptr) {
  if (x0.rows() == 0) throw DimensionError("diffusion loss on an empty batch");
  std::vector<int> steps(static_cast<std::size_t>(x0.rows()));
  for (auto& t : steps) t = 1 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(sched.steps())));
  const Matrix eps = StandardNormal(x0.rows(), x0.cols(), rng);
  return DiffusionLoss(denoiser, sched, emb_dim, x0, std::move(steps), eps, grads);
}

// Deterministic reverse chain: corrupt to step T' with eps = 0, then follow
// the posterior mean down to t = 1 and return the last x0 prediction.
inline Matrix ReverseDenoise(const Mlp& denoiser, const NoiseSchedule& sched, int emb_dim,
                             const Matrix& x, int inference_steps) {
  if (inference_steps < 0 || inference_steps > sched.steps()) {
    throw ConfigError("inference steps T' must be in [0, T]");
  }
  const auto rows = static_cast<std::size_t>(x.rows());
  if (inference_steps == 0) {
    return denoiser.Forward(DenoiserInput(x, std::vector<int>(rows, 0), emb_dim));
  }
  Matrix xt = std::sqrt(sched.alpha_bar(inference_steps)) * x;
  Matrix x0_hat;
  for (int t = inference_steps; t >= 1; --t) {
    x0_hat = denoiser.Forward(DenoiserInput(xt, std::vector<int>(rows, t), emb_dim));
    xt = sched.posterior_coef_x0(t) * x0_hat + sched.posterior_coef_xt(t) * xt;
  }
  return x0_hat;
}

struct DiffRecParams {
  int steps = 5;
  double noise_scale = 0.1;
  double beta_min = 5e-3;
  double beta_max = 1e-2;
  int inference_steps = 0;
  std::vector<int> hidden = {1000};
  int emb_dim = 10;
  double lr = 1e-3;
  double weight_decay = 0.0;
  int epochs = 30;
  int batch = 400;
};

class DiffRecModel final : public Recommender {
 public:
  DiffRecModel(NoiseSchedule schedule, Mlp denoiser, int emb_dim, int inference_steps)
      : schedule_(std::move(schedule)),
        denoiser_(std::move(denoiser)),
        emb_dim_(emb_dim),
        inference_steps_(inference_steps) {
    if (denoiser_.input_dim() != denoiser_.output_dim() + emb_dim_) {
      throw DimensionError("denoiser input must be |I| + timestep embedding dim");
    }
    if (inference_steps_ < 0 || inference_steps_ > schedule_.steps()) {
      throw ConfigError("inference steps T' must be in [0, T]");
    }
  }

  DiffRecModel(std::size_t num_items, const DiffRecParams& hp, Rng& rng)
      : DiffRecModel(NoiseSchedule(hp.steps, hp.noise_scale, hp.beta_min, hp.beta_max),
                     MakeDenoiser(static_cast<int>(num_items), hp.hidden, hp.emb_dim, rng),
                     hp.emb_dim, hp.inference_steps) {}

  static Mlp MakeDenoiser(int dim, const std::vector<int>& hidden, int emb_dim, Rng& rng) {
    std::vector<int> dims = {dim + emb_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(dim);
    return Mlp(dims, Activation::kTanh, Activation::kIdentity, rng);
  }

  std::string name() const override { return "diffrec"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(denoiser_.output_dim()); }
  const NoiseSchedule& schedule() const { return schedule_; }
  Mlp& denoiser() { return denoiser_; }
  const Mlp& denoiser() const { return denoiser_; }
  int emb_dim() const { return emb_dim_; }
  int inference_steps() const { return inference_steps_; }

  Matrix ScoreUsers(const Matrix& histories, std::span<const std::uint32_t>) const override {
    return ReverseDenoise(denoiser_, schedule_, emb_dim_, histories, inference_steps_);
  }

  Vector ScoreUser(const Vector& history, std::uint32_t user) const override {
    Matrix row = history.transpose();
    return ScoreUsers(row, std::span<const std::uint32_t>(&user, 1)).row(0).transpose();
  }

  void WriteTo(Checkpoint& ck, const std::string& prefix) const {
    ck.header[prefix + "schedule"] = {{"T", schedule_.steps()},
                                      {"s", schedule_.scale()},
                                      {"beta_min", schedule_.beta_min()},
                                      {"beta_max", schedule_.beta_max()}};
    ck.header[prefix + "emb_dim"] = emb_dim_;
    ck.header[prefix + "inference_steps"] = inference_steps_;
    ck.PutMlp(prefix + "denoiser", denoiser_);
  }

  static DiffRecModel ReadFrom(const Checkpoint& ck, const std::string& prefix) {
    const auto& s = ck.header.at(prefix + "schedule");
    return DiffRecModel(NoiseSchedule(s.at("T").get<int>(), s.at("s").get<double>(),
                                      s.at("beta_min").get<double>(), s.at("beta_max").get<double>()),
                        ck.GetMlp(prefix + "denoiser"), ck.header.at(prefix + "emb_dim").get<int>(),
                        ck.header.at(prefix + "inference_steps").get<int>());
  }

  void Save(const std::filesystem::path& path) const override {
    Checkpoint ck;
    ck.header["model"] = "diffrec";
    WriteTo(ck, "");
    ck.Save(path);
  }

  static DiffRecModel FromCheckpoint(const Checkpoint& ck) { return ReadFrom(ck, ""); }

 private:
  NoiseSchedule schedule_;
  Mlp denoiser_;
  int emb_dim_;
  int inference_steps_;
};

inline DiffRecModel FitDiffRec(const ItemRows& train, std::size_t num_items,
                               const DiffRecParams& hp, std::uint64_t seed,
                               std::vector<double>* loss_curve = nullptr) {
  if (hp.epochs < 1 || hp.batch < 1 || hp.emb_dim < 2) throw ConfigError("invalid DiffRec parameters");
  std::vector<std::uint32_t> users;
  for (std::size_t u = 0; u < train.size(); ++u) {
    if (!train[u].empty()) users.push_back(static_cast<std::uint32_t>(u));
  }
  if (users.empty()) throw DataError("DiffRec: empty train set");

  Rng root(seed);
  Rng init = root.Split("init");
  DiffRecModel model(num_items, hp, init);
  AdamState adam;
  adam.options.lr = hp.lr;
  adam.options.weight_decay = hp.weight_decay;
  MlpGradients grads = model.denoiser().ZeroGradients();

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    Rng rng = root.Split("epoch").Split(static_cast<std::uint64_t>(epoch));
    rng.Shuffle(users);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < users.size(); start += static_cast<std::size_t>(hp.batch)) {
      const std::size_t end = std::min(users.size(), start + static_cast<std::size_t>(hp.batch));
      const Matrix x0 = HistoryMatrix(
          train, std::span<const std::uint32_t>(users.data() + start, end - start), num_items);
      grads.SetZero();
      const double loss =
          DiffusionLoss(model.denoiser(), model.schedule(), model.emb_dim(), x0, rng, &grads);
      auto params = model.denoiser().parameters();
      AdamUpdate(params, model.denoiser().GradientRefs(grads), adam);
      epoch_loss += loss;
      ++batches;
    }
    if (loss_curve != nullptr) loss_curve->push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

}  // namespace fairdiff
