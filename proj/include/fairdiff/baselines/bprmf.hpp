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
#include <string>
#include <vector>

#include "fairdiff/checkpoint.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/recommender.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

struct BprMfParams {
  int dim = 64;
  double lr = 1e-3;
  double reg = 1e-4;
  int epochs = 30;
  int batch = 1024;
  double init_std = 0.1;
};

// Matrix factorisation scored as p_u . q_i + b_i.
class BprMfModel final : public Recommender {
 public:
  BprMfModel(Matrix users, Matrix items, Matrix bias)
      : users_(std::move(users)), items_(std::move(items)), bias_(std::move(bias)) {}

  std::string name() const override { return "bprmf"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(items_.rows()); }
  const Matrix& user_factors() const { return users_; }
  const Matrix& item_factors() const { return items_; }
  const Matrix& item_bias() const { return bias_; }

  Vector ScoreUser(const Vector&, std::uint32_t user) const override {
    if (user >= users_.rows()) throw DimensionError("bprmf: unknown user index");
    return items_ * users_.row(user).transpose() + bias_.row(0).transpose();
  }

  void Save(const std::filesystem::path& path) const override {
    Checkpoint ck;
    ck.header["model"] = "bprmf";
    ck.PutMatrix("P", users_);
    ck.PutMatrix("Q", items_);
    ck.PutMatrix("b", bias_);
    ck.Save(path);
  }

  static BprMfModel FromCheckpoint(const Checkpoint& ck) {
    return BprMfModel(ck.GetMatrix("P"), ck.GetMatrix("Q"), ck.GetMatrix("b"));
  }

 private:
  Matrix users_;
  Matrix items_;
  Matrix bias_;
};

struct BprTripleGrad {
  Vector user, pos, neg;
  double pos_bias = 0, neg_bias = 0;
};

// -ln sigma(x_ui - x_uj) + reg (|p_u|^2 + |q_i|^2 + |q_j|^2).
inline double BprTripleLoss(const Vector& p_u, const Vector& q_i, const Vector& q_j, double b_i,
                            double b_j, double reg, BprTripleGrad* grad = nullptr) {
  const double diff = p_u.dot(q_i) + b_i - p_u.dot(q_j) - b_j;
  // softplus(-diff), stable for large |diff|
  const double nll = diff > 0 ? std::log1p(std::exp(-diff)) : -diff + std::log1p(std::exp(diff));
  const double loss = nll + reg * (p_u.squaredNorm() + q_i.squaredNorm() + q_j.squaredNorm());
  if (grad != nullptr) {
    const double g = -1.0 / (1.0 + std::exp(diff));  // d nll / d diff = -sigma(-diff)
    grad->user = g * (q_i - q_j) + 2.0 * reg * p_u;
    grad->pos = g * p_u + 2.0 * reg * q_i;
    grad->neg = -g * p_u + 2.0 * reg * q_j;
    grad->pos_bias = g;
    grad->neg_bias = -g;
  }
  return loss;
}

// Uniform negative outside the user's sorted train row; -1 when none exists.
inline std::int64_t SampleNegative(const std::vector<std::uint32_t>& row, std::size_t num_items,
                                   Rng& rng) {
  if (row.size() >= num_items) return -1;
  while (true) {
    const auto j = static_cast<std::uint32_t>(rng.Below(num_items));
    if (!std::binary_search(row.begin(), row.end(), j)) return j;
  }
}

// Mini-batch BPR with Adam; negatives are redrawn every epoch. `train` rows
// must be sorted. Per-epoch mean triple losses go to loss_curve if given.
inline BprMfModel FitBprMf(const ItemRows& train, std::size_t num_items, const BprMfParams& hp,
                           std::uint64_t seed, std::vector<double>* loss_curve = nullptr) {
  if (hp.dim < 1 || hp.epochs < 1 || hp.batch < 1) throw ConfigError("invalid BPRMF parameters");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t u = 0; u < train.size(); ++u) {
    for (auto i : train[u]) pairs.emplace_back(static_cast<std::uint32_t>(u), i);
  }
  if (pairs.empty()) throw DataError("BPRMF: empty train set");

  Rng root(seed);
  Rng init = root.Split("init");
  Matrix users(static_cast<Eigen::Index>(train.size()), hp.dim);
  Matrix items(static_cast<Eigen::Index>(num_items), hp.dim);
  for (Eigen::Index k = 0; k < users.size(); ++k) users.data()[k] = hp.init_std * init.Normal();
  for (Eigen::Index k = 0; k < items.size(); ++k) items.data()[k] = hp.init_std * init.Normal();
  Matrix bias = Matrix::Zero(1, static_cast<Eigen::Index>(num_items));

  Matrix g_users = Matrix::Zero(users.rows(), users.cols());
  Matrix g_items = Matrix::Zero(items.rows(), items.cols());
  Matrix g_bias = Matrix::Zero(1, bias.cols());
  AdamState adam;
  adam.options.lr = hp.lr;
  std::vector<Matrix*> params = {&users, &items, &bias};
  std::vector<const Matrix*> grads = {&g_users, &g_items, &g_bias};

  BprTripleGrad tg;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    Rng rng = root.Split("epoch").Split(static_cast<std::uint64_t>(epoch));
    rng.Shuffle(pairs);
    double epoch_loss = 0;
    std::size_t counted = 0;
    for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(hp.batch)) {
      const std::size_t end = std::min(pairs.size(), start + static_cast<std::size_t>(hp.batch));
      g_users.setZero();
      g_items.setZero();
      g_bias.setZero();
      std::size_t in_batch = 0;
      for (std::size_t k = start; k < end; ++k) {
        const auto [u, i] = pairs[k];
        const auto j = SampleNegative(train[u], num_items, rng);
        if (j < 0) continue;
        const double loss =
            BprTripleLoss(users.row(u).transpose(), items.row(i).transpose(),
                          items.row(j).transpose(), bias(0, i), bias(0, j), hp.reg, &tg);
        g_users.row(u) += tg.user.transpose();
        g_items.row(i) += tg.pos.transpose();
        g_items.row(j) += tg.neg.transpose();
        g_bias(0, i) += tg.pos_bias;
        g_bias(0, j) += tg.neg_bias;
        epoch_loss += loss;
        ++in_batch;
      }
      if (in_batch == 0) continue;
      const double scale = 1.0 / static_cast<double>(in_batch);
      g_users *= scale;
      g_items *= scale;
      g_bias *= scale;
      counted += in_batch;
      AdamUpdate(params, grads, adam);
    }
    if (!std::isfinite(epoch_loss)) throw DivergenceError("BPRMF: loss is not finite");
    if (loss_curve != nullptr && counted > 0) {
      loss_curve->push_back(epoch_loss / static_cast<double>(counted));
    }
  }
  return BprMfModel(std::move(users), std::move(items), std::move(bias));
}

}  // namespace fairdiff
