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
#include "fairdiff/nncore.hpp"
#include "fairdiff/recommender.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

struct MultiVaeParams {
  int latent_dim = 200;
  std::vector<int> hidden = {600};
  double dropout = 0.5;
  double beta_max = 0.2;
  int anneal_steps = 20000;
  double lr = 1e-3;
  int epochs = 50;
  int batch = 500;
};

// Row-wise L2 normalisation; zero rows stay zero.
inline Matrix L2NormalizeRows(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 0) out.row(r) /= n;
  }
  return out;
}

// Sum over latent dims of KL(N(mu, exp(logvar)) || N(0, 1)), averaged over rows.
inline double GaussianKl(const Matrix& mu, const Matrix& logvar) {
  return -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum() /
         static_cast<double>(mu.rows());
}

class MultiVaeModel final : public Recommender {
 public:
  MultiVaeModel(Mlp encoder, Mlp decoder)
      : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
    if (encoder_.output_dim() != 2 * decoder_.input_dim()) {
      throw DimensionError("MultiVAE encoder output must be twice the latent dim");
    }
  }

  MultiVaeModel(std::size_t num_items, const MultiVaeParams& hp, Rng& rng) {
    std::vector<int> enc = {static_cast<int>(num_items)};
    enc.insert(enc.end(), hp.hidden.begin(), hp.hidden.end());
    enc.push_back(2 * hp.latent_dim);
    std::vector<int> dec = {hp.latent_dim};
    dec.insert(dec.end(), hp.hidden.rbegin(), hp.hidden.rend());
    dec.push_back(static_cast<int>(num_items));
    encoder_ = Mlp(enc, Activation::kTanh, Activation::kIdentity, rng);
    decoder_ = Mlp(dec, Activation::kTanh, Activation::kIdentity, rng);
  }

  std::string name() const override { return "multivae"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(decoder_.output_dim()); }
  int latent_dim() const { return decoder_.input_dim(); }
  Mlp& encoder() { return encoder_; }
  Mlp& decoder() { return decoder_; }
  const Mlp& encoder() const { return encoder_; }
  const Mlp& decoder() const { return decoder_; }

  // Decoder logits at z = mu.
  Matrix ScoreUsers(const Matrix& histories, std::span<const std::uint32_t>) const override {
    const Matrix h = encoder_.Forward(L2NormalizeRows(histories));
    return decoder_.Forward(Matrix(h.leftCols(latent_dim())));
  }

  Vector ScoreUser(const Vector& history, std::uint32_t user) const override {
    Matrix row = history.transpose();
    return ScoreUsers(row, std::span<const std::uint32_t>(&user, 1)).row(0).transpose();
  }

  void Save(const std::filesystem::path& path) const override {
    Checkpoint ck;
    ck.header["model"] = "multivae";
    ck.PutMlp("encoder", encoder_);
    ck.PutMlp("decoder", decoder_);
    ck.Save(path);
  }

  static MultiVaeModel FromCheckpoint(const Checkpoint& ck) {
    return MultiVaeModel(ck.GetMlp("encoder"), ck.GetMlp("decoder"));
  }

 private:
  Mlp encoder_;
  Mlp decoder_;
};

struct MultiVaeGrads {
  MlpGradients encoder;
  MlpGradients decoder;
};

struct MultiVaeLossParts {
  double total = 0;
  double nll = 0;
  double kl = 0;
};

// Loss on a batch with all randomness supplied: dropout_mask multiplies the
// normalised input (entries 0 or 1/(1-p)); eps has shape batch x latent.
inline MultiVaeLossParts MultiVaeLoss(const MultiVaeModel& m, const Matrix& x,
                                      const Matrix& dropout_mask, const Matrix& eps, double beta,
                                      MultiVaeGrads* grads = nullptr) {
  const int dz = m.latent_dim();
  const double batch = static_cast<double>(x.rows());
  Matrix input = L2NormalizeRows(x).cwiseProduct(dropout_mask);
  Mlp::Cache enc_cache, dec_cache;
  const Matrix h = m.encoder().Forward(input, &enc_cache);
  const Matrix mu = h.leftCols(dz);
  const Matrix logvar = h.rightCols(dz);
  const Matrix sd = (0.5 * logvar.array()).exp().matrix();
  const Matrix z = mu + sd.cwiseProduct(eps);
  const Matrix logits = m.decoder().Forward(z, &dec_cache);
  const Matrix lsm = LogSoftmax(logits);

  MultiVaeLossParts parts;
  parts.nll = -(x.cwiseProduct(lsm)).sum() / batch;
  parts.kl = GaussianKl(mu, logvar);
  parts.total = parts.nll + beta * parts.kl;
  if (!std::isfinite(parts.total)) throw DivergenceError("MultiVAE: loss is not finite");

  if (grads != nullptr) {
    // d nll / d logits = (softmax * sum_i x_i - x) / batch
    Matrix d_logits = lsm.array().exp().matrix();
    const Vector row_mass = x.rowwise().sum();
    for (Eigen::Index r = 0; r < d_logits.rows(); ++r) d_logits.row(r) *= row_mass[r];
    d_logits = (d_logits - x) / batch;
    const Matrix d_z = m.decoder().Backward(dec_cache, d_logits, grads->decoder);
    Matrix d_h(h.rows(), h.cols());
    d_h.leftCols(dz) = d_z + beta * mu / batch;
    d_h.rightCols(dz) = (d_z.array() * eps.array() * 0.5 * sd.array() +
                         beta * 0.5 * (logvar.array().exp() - 1.0) / batch)
                            .matrix();
    m.encoder().Backward(enc_cache, d_h, grads->encoder);
  }
  return parts;
}

inline Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    mask.data()[k] = rate > 0 ? (rng.Uniform() < keep ? 1.0 / keep : 0.0) : 1.0;
  }
  return mask;
}

inline Matrix StandardNormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix out(rows, cols);
  for (Eigen::Index k = 0; k < out.size(); ++k) out.data()[k] = rng.Normal();
  return out;
}

// Users with an empty train row are skipped. beta ramps linearly from 0 to
// beta_max over anneal_steps optimiser steps.
inline MultiVaeModel FitMultiVae(const ItemRows& train, std::size_t num_items,
                                 const MultiVaeParams& hp, std::uint64_t seed,
                                 std::vector<double>* loss_curve = nullptr) {
  if (hp.latent_dim < 1 || hp.epochs < 1 || hp.batch < 1 || hp.dropout < 0 || hp.dropout >= 1) {
    throw ConfigError("invalid MultiVAE parameters");
  }
  std::vector<std::uint32_t> users;
  for (std::size_t u = 0; u < train.size(); ++u) {
    if (!train[u].empty()) users.push_back(static_cast<std::uint32_t>(u));
  }
  if (users.empty()) throw DataError("MultiVAE: empty train set");

  Rng root(seed);
  Rng init = root.Split("init");
  MultiVaeModel model(num_items, hp, init);
  AdamState adam;
  adam.options.lr = hp.lr;
  MultiVaeGrads grads{model.encoder().ZeroGradients(), model.decoder().ZeroGradients()};
  std::int64_t step = 0;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    Rng rng = root.Split("epoch").Split(static_cast<std::uint64_t>(epoch));
    rng.Shuffle(users);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < users.size(); start += static_cast<std::size_t>(hp.batch)) {
      const std::size_t end = std::min(users.size(), start + static_cast<std::size_t>(hp.batch));
      std::span<const std::uint32_t> batch_users(users.data() + start, end - start);
      const Matrix x = HistoryMatrix(train, batch_users, num_items);
      const double beta =
          hp.anneal_steps > 0
              ? std::min(hp.beta_max, hp.beta_max * static_cast<double>(step) / hp.anneal_steps)
              : hp.beta_max;
      const Matrix mask = DropoutMask(x.rows(), x.cols(), hp.dropout, rng);
      const Matrix eps = StandardNormal(x.rows(), model.latent_dim(), rng);
      grads.encoder.SetZero();
      grads.decoder.SetZero();
      const auto parts = MultiVaeLoss(model, x, mask, eps, beta, &grads);
      auto params = ConcatParams({&model.encoder(), &model.decoder()});
      auto refs = model.encoder().GradientRefs(grads.encoder);
      auto dec_refs = model.decoder().GradientRefs(grads.decoder);
      refs.insert(refs.end(), dec_refs.begin(), dec_refs.end());
      AdamUpdate(params, refs, adam);
      epoch_loss += parts.total;
      ++batches;
      ++step;
    }
    if (loss_curve != nullptr) loss_curve->push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

}  // namespace fairdiff
