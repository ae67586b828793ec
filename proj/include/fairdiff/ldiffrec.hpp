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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fairdiff/baselines/bprmf.hpp"
#include "fairdiff/baselines/multivae.hpp"
#include "fairdiff/checkpoint.hpp"
#include "fairdiff/diffusion.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/nncore.hpp"
#include "fairdiff/recommender.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

struct ClusterPartition {
  std::vector<std::uint32_t> assignment;           // item -> cluster
  std::vector<std::vector<std::uint32_t>> members;  // cluster -> ascending items

  std::size_t num_clusters() const { return members.size(); }
  std::size_t num_items() const { return assignment.size(); }

  static ClusterPartition FromAssignment(std::vector<std::uint32_t> assignment,
                                         std::size_t num_clusters) {
    ClusterPartition p;
    p.members.resize(num_clusters);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] >= num_clusters) throw DimensionError("cluster id out of range");
      p.members[assignment[i]].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t c = 0; c < num_clusters; ++c) {
      if (p.members[c].empty()) throw DataError("cluster " + std::to_string(c) + " is empty");
    }
    p.assignment = std::move(assignment);
    return p;
  }

  friend bool operator==(const ClusterPartition&, const ClusterPartition&) = default;
};

// Columns of x routed to their cluster, ascending item order within each.
inline std::vector<Matrix> SplitByCluster(const Matrix& x, const ClusterPartition& p) {
  if (static_cast<std::size_t>(x.cols()) != p.num_items()) {
    throw DimensionError("SplitByCluster: vector length does not match the partition");
  }
  std::vector<Matrix> parts;
  parts.reserve(p.num_clusters());
  for (const auto& items : p.members) {
    Matrix sub(x.rows(), static_cast<Eigen::Index>(items.size()));
    for (std::size_t k = 0; k < items.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(items[k]);
    parts.push_back(std::move(sub));
  }
  return parts;
}

inline Matrix MergeClusters(const std::vector<Matrix>& parts, const ClusterPartition& p) {
  if (parts.size() != p.num_clusters()) throw DimensionError("MergeClusters: cluster count mismatch");
  const Eigen::Index rows = parts.empty() ? 0 : parts.front().rows();
  Matrix x(rows, static_cast<Eigen::Index>(p.num_items()));
  for (std::size_t c = 0; c < parts.size(); ++c) {
    if (parts[c].rows() != rows || static_cast<std::size_t>(parts[c].cols()) != p.members[c].size()) {
      throw DimensionError("MergeClusters: sub-vector " + std::to_string(c) + " has the wrong length");
    }
    for (std::size_t k = 0; k < p.members[c].size(); ++k) {
      x.col(p.members[c][k]) = parts[c].col(static_cast<Eigen::Index>(k));
    }
  }
  return x;
}

struct KMeansResult {
  ClusterPartition partition;
  Matrix centroids;
  std::vector<double> wcss;  // after each iteration
  int iterations = 0;
};

// Lloyd's algorithm with greedy farthest-point seeding. The first seed is
// drawn from `seed`; each next seed maximises the distance to its nearest
// chosen seed (ties: lowest index). Empty clusters take the point farthest
// from its own centroid among clusters with more than one point.
inline KMeansResult KMeansCluster(const Matrix& points, std::size_t num_clusters, std::uint64_t seed,
                                  int max_iterations = 100, double tolerance = 1e-6) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (num_clusters < 1) throw ConfigError("k-means needs C >= 1");
  if (num_clusters > n) {
    throw ConfigError("k-means: C = " + std::to_string(num_clusters) + " exceeds " +
                      std::to_string(n) + " points");
  }
  auto sq = [&](std::size_t i, const Matrix& centers, std::size_t c) {
    return (points.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
  };

  Rng rng(seed);
  std::vector<std::size_t> seeds = {static_cast<std::size_t>(rng.Below(n))};
  std::vector<char> chosen(n, 0);
  chosen[seeds[0]] = 1;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < num_clusters) {
    const auto last = points.row(static_cast<Eigen::Index>(seeds.back()));
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (points.row(static_cast<Eigen::Index>(i)) - last).squaredNorm());
      if (chosen[i]) continue;
      if (best == n || nearest[i] > nearest[best]) best = i;
    }
    chosen[best] = 1;
    seeds.push_back(best);
  }

  Matrix centroids(static_cast<Eigen::Index>(num_clusters), points.cols());
  for (std::size_t c = 0; c < num_clusters; ++c) {
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(seeds[c]));
  }

  KMeansResult result;
  std::vector<std::uint32_t> assign(n, 0);
  std::vector<std::size_t> sizes(num_clusters);
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sq(i, centroids, 0);
      for (std::size_t c = 1; c < num_clusters; ++c) {
        const double d = sq(i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = static_cast<std::uint32_t>(best);
      ++sizes[best];
    }
    for (std::size_t c = 0; c < num_clusters; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      double far_d = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double d = sq(i, centroids, assign[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[assign[far]];
      assign[far] = static_cast<std::uint32_t>(c);
      sizes[c] = 1;
      centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
    }

    Matrix updated = Matrix::Zero(centroids.rows(), centroids.cols());
    for (std::size_t i = 0; i < n; ++i) {
      updated.row(assign[i]) += points.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t c = 0; c < num_clusters; ++c) {
      updated.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
    }
    double movement = 0;
    for (std::size_t c = 0; c < num_clusters; ++c) {
      movement = std::max(movement, (updated.row(static_cast<Eigen::Index>(c)) -
                                     centroids.row(static_cast<Eigen::Index>(c))).norm());
    }
    centroids = std::move(updated);
    double wcss = 0;
    for (std::size_t i = 0; i < n; ++i) wcss += sq(i, centroids, assign[i]);
    result.wcss.push_back(wcss);
    result.iterations = iter + 1;
    if (movement < tolerance) break;
  }
  result.partition = ClusterPartition::FromAssignment(std::move(assign), num_clusters);
  result.centroids = std::move(centroids);
  return result;
}

// Item factors of a BPRMF fit; stands in for graph-based embeddings.
inline Matrix PretrainItemEmbeddings(const ItemRows& train, std::size_t num_items, int dim,
                                     std::uint64_t seed, int epochs = 20) {
  BprMfParams hp;
  hp.dim = dim;
  hp.epochs = epochs;
  return FitBprMf(train, num_items, hp, seed).item_factors();
}

struct LDiffRecParams {
  int clusters = 2;
  double compression = 0.1;  // rho: latent dims per cluster = max(1, round(rho * size))
  int steps = 5;
  double noise_scale = 0.1;
  double beta_min = 5e-3;
  double beta_max = 1e-2;
  int inference_steps = 0;
  std::vector<int> hidden = {300};
  int emb_dim = 10;
  double gamma = 1.0;    // weight of the VAE terms
  double beta_kl = 0.1;  // KL weight inside the VAE terms
  double lr = 1e-3;
  int epochs = 30;
  int batch = 400;
  int embedding_dim = 64;
  int embedding_epochs = 20;
};

inline std::vector<int> LatentDims(const ClusterPartition& p, double compression) {
  std::vector<int> dims;
  for (const auto& items : p.members) {
    dims.push_back(std::max(1, static_cast<int>(std::lround(compression * static_cast<double>(items.size())))));
  }
  return dims;
}

class LDiffRecModel final : public Recommender {
 public:
  LDiffRecModel(ClusterPartition partition, std::vector<Mlp> encoders, std::vector<Mlp> decoders,
                NoiseSchedule schedule, Mlp denoiser, int emb_dim, int inference_steps)
      : partition_(std::move(partition)),
        encoders_(std::move(encoders)),
        decoders_(std::move(decoders)),
        schedule_(std::move(schedule)),
        denoiser_(std::move(denoiser)),
        emb_dim_(emb_dim),
        inference_steps_(inference_steps) {
    if (encoders_.size() != partition_.num_clusters() || decoders_.size() != partition_.num_clusters()) {
      throw DimensionError("L-DiffRec needs one encoder and decoder per cluster");
    }
    offsets_.push_back(0);
    for (std::size_t c = 0; c < encoders_.size(); ++c) {
      const auto size = static_cast<int>(partition_.members[c].size());
      const int dc = decoders_[c].input_dim();
      if (encoders_[c].input_dim() != size || decoders_[c].output_dim() != size ||
          encoders_[c].output_dim() != 2 * dc) {
        throw DimensionError("cluster " + std::to_string(c) + " VAE shape mismatch");
      }
      latent_dims_.push_back(dc);
      offsets_.push_back(offsets_.back() + dc);
    }
    if (denoiser_.output_dim() != latent_dim() || denoiser_.input_dim() != latent_dim() + emb_dim_) {
      throw DimensionError("latent denoiser must map latent_dim + emb_dim to latent_dim");
    }
    if (inference_steps_ < 0 || inference_steps_ > schedule_.steps()) {
      throw ConfigError("inference steps T' must be in [0, T]");
    }
  }

  std::string name() const override { return "ldiffrec"; }
  std::size_t num_items() const override { return partition_.num_items(); }
  const ClusterPartition& partition() const { return partition_; }
  const std::vector<int>& latent_dims() const { return latent_dims_; }
  int latent_dim() const { return offsets_.back(); }
  int offset(std::size_t c) const { return offsets_[c]; }
  const NoiseSchedule& schedule() const { return schedule_; }
  int emb_dim() const { return emb_dim_; }
  int inference_steps() const { return inference_steps_; }
  std::vector<Mlp>& encoders() { return encoders_; }
  std::vector<Mlp>& decoders() { return decoders_; }
  const std::vector<Mlp>& encoders() const { return encoders_; }
  const std::vector<Mlp>& decoders() const { return decoders_; }
  Mlp& denoiser() { return denoiser_; }
  const Mlp& denoiser() const { return denoiser_; }

  // Concatenated encoder means of the L2-normalised histories.
  Matrix EncodeMeans(const Matrix& histories) const {
    const auto parts = SplitByCluster(L2NormalizeRows(histories), partition_);
    Matrix z(histories.rows(), latent_dim());
    for (std::size_t c = 0; c < parts.size(); ++c) {
      z.middleCols(offsets_[c], latent_dims_[c]) = encoders_[c].Forward(parts[c]).leftCols(latent_dims_[c]);
    }
    return z;
  }

  Matrix Decode(const Matrix& latent) const {
    std::vector<Matrix> parts;
    for (std::size_t c = 0; c < decoders_.size(); ++c) {
      parts.push_back(decoders_[c].Forward(Matrix(latent.middleCols(offsets_[c], latent_dims_[c]))));
    }
    return MergeClusters(parts, partition_);
  }

  Matrix ScoreUsers(const Matrix& histories, std::span<const std::uint32_t>) const override {
    const Matrix z = EncodeMeans(histories);
    return Decode(ReverseDenoise(denoiser_, schedule_, emb_dim_, z, inference_steps_));
  }

  Vector ScoreUser(const Vector& history, std::uint32_t user) const override {
    Matrix row = history.transpose();
    return ScoreUsers(row, std::span<const std::uint32_t>(&user, 1)).row(0).transpose();
  }

  void Save(const std::filesystem::path& path) const override {
    Checkpoint ck;
    ck.header["model"] = "ldiffrec";
    ck.header["assignment"] = partition_.assignment;
    ck.header["clusters"] = partition_.num_clusters();
    for (std::size_t c = 0; c < encoders_.size(); ++c) {
      ck.PutMlp("encoder" + std::to_string(c), encoders_[c]);
      ck.PutMlp("decoder" + std::to_string(c), decoders_[c]);
    }
    ck.header["latent/schedule"] = {{"T", schedule_.steps()},
                                    {"s", schedule_.scale()},
                                    {"beta_min", schedule_.beta_min()},
                                    {"beta_max", schedule_.beta_max()}};
    ck.header["latent/emb_dim"] = emb_dim_;
    ck.header["latent/inference_steps"] = inference_steps_;
    ck.PutMlp("latent/denoiser", denoiser_);
    ck.Save(path);
  }

  static LDiffRecModel FromCheckpoint(const Checkpoint& ck) {
    const auto clusters = ck.header.at("clusters").get<std::size_t>();
    auto partition = ClusterPartition::FromAssignment(
        ck.header.at("assignment").get<std::vector<std::uint32_t>>(), clusters);
    std::vector<Mlp> enc, dec;
    for (std::size_t c = 0; c < clusters; ++c) {
      enc.push_back(ck.GetMlp("encoder" + std::to_string(c)));
      dec.push_back(ck.GetMlp("decoder" + std::to_string(c)));
    }
    const auto& s = ck.header.at("latent/schedule");
    return LDiffRecModel(std::move(partition), std::move(enc), std::move(dec),
                         NoiseSchedule(s.at("T").get<int>(), s.at("s").get<double>(),
                                       s.at("beta_min").get<double>(), s.at("beta_max").get<double>()),
                         ck.GetMlp("latent/denoiser"), ck.header.at("latent/emb_dim").get<int>(),
                         ck.header.at("latent/inference_steps").get<int>());
  }

 private:
  ClusterPartition partition_;
  std::vector<Mlp> encoders_;
  std::vector<Mlp> decoders_;
  NoiseSchedule schedule_;
  Mlp denoiser_;
  int emb_dim_;
  int inference_steps_;
  std::vector<int> latent_dims_;
  std::vector<int> offsets_;
};

// Untrained model: one linear VAE per cluster and a tanh latent denoiser.
inline LDiffRecModel MakeLDiffRec(ClusterPartition partition, const LDiffRecParams& hp, Rng& rng) {
  const auto dims = LatentDims(partition, hp.compression);
  std::vector<Mlp> enc, dec;
  int total = 0;
  for (std::size_t c = 0; c < partition.num_clusters(); ++c) {
    const int size = static_cast<int>(partition.members[c].size());
    enc.emplace_back(std::vector<int>{size, 2 * dims[c]}, Activation::kTanh, Activation::kIdentity, rng);
    dec.emplace_back(std::vector<int>{dims[c], size}, Activation::kTanh, Activation::kIdentity, rng);
    total += dims[c];
  }
  Mlp denoiser = DiffRecModel::MakeDenoiser(total, hp.hidden, hp.emb_dim, rng);
  return LDiffRecModel(std::move(partition), std::move(enc), std::move(dec),
                       NoiseSchedule(hp.steps, hp.noise_scale, hp.beta_min, hp.beta_max),
                       std::move(denoiser), hp.emb_dim, hp.inference_steps);
}

struct LDiffRecNoise {
  Matrix vae_eps;         // batch x latent_dim
  std::vector<int> steps;  // per row, in [1, T]
  Matrix diffusion_eps;   // batch x latent_dim
};

inline LDiffRecNoise DrawLDiffRecNoise(const LDiffRecModel& m, Eigen::Index rows, Rng& rng) {
  LDiffRecNoise noise;
  noise.vae_eps = StandardNormal(rows, m.latent_dim(), rng);
  noise.steps.resize(static_cast<std::size_t>(rows));
  for (auto& t : noise.steps) {
    t = 1 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(m.schedule().steps())));
  }
  noise.diffusion_eps = StandardNormal(rows, m.latent_dim(), rng);
  return noise;
}

struct LDiffRecGrads {
  std::vector<MlpGradients> encoders;
  std::vector<MlpGradients> decoders;
  MlpGradients denoiser;

  explicit LDiffRecGrads(const LDiffRecModel& m) {
    for (const auto& e : m.encoders()) encoders.push_back(e.ZeroGradients());
    for (const auto& d : m.decoders()) decoders.push_back(d.ZeroGradients());
    denoiser = m.denoiser().ZeroGradients();
  }

  void SetZero() {
    for (auto& g : encoders) g.SetZero();
    for (auto& g : decoders) g.SetZero();
    denoiser.SetZero();
  }
};

struct LDiffRecLossParts {
  double total = 0;
  double diffusion = 0;
  double recon = 0;
  double kl = 0;
};

// total = L_diff + gamma * (L_recon + beta_kl * KL). The denoised latent is
// decoded per cluster and the multinomial likelihood runs over all items.
inline LDiffRecLossParts LDiffRecLoss(const LDiffRecModel& m, const Matrix& x,
                                      const LDiffRecNoise& noise, double gamma, double beta_kl,
                                      LDiffRecGrads* grads = nullptr) {
  const std::size_t clusters = m.partition().num_clusters();
  const double batch = static_cast<double>(x.rows());
  const auto inputs = SplitByCluster(L2NormalizeRows(x), m.partition());

  std::vector<Mlp::Cache> enc_cache(clusters), dec_cache(clusters);
  Matrix mu(x.rows(), m.latent_dim()), logvar(x.rows(), m.latent_dim());
  for (std::size_t c = 0; c < clusters; ++c) {
    const Matrix h = m.encoders()[c].Forward(inputs[c], &enc_cache[c]);
    const int dc = m.latent_dims()[c];
    mu.middleCols(m.offset(c), dc) = h.leftCols(dc);
    logvar.middleCols(m.offset(c), dc) = h.rightCols(dc);
  }
  const Matrix sd = (0.5 * logvar.array()).exp().matrix();
  const Matrix z0 = mu + sd.cwiseProduct(noise.vae_eps);

  DiffusionStep diffusion(m.denoiser(), m.schedule(), m.emb_dim(), z0, noise.steps, noise.diffusion_eps);
  const Matrix& z_hat = diffusion.prediction();

  std::vector<Matrix> logit_parts;
  for (std::size_t c = 0; c < clusters; ++c) {
    logit_parts.push_back(m.decoders()[c].Forward(
        Matrix(z_hat.middleCols(m.offset(c), m.latent_dims()[c])), &dec_cache[c]));
  }
  const Matrix lsm = LogSoftmax(MergeClusters(logit_parts, m.partition()));

  LDiffRecLossParts parts;
  parts.diffusion = diffusion.loss();
  parts.recon = -(x.cwiseProduct(lsm)).sum() / batch;
  parts.kl = GaussianKl(mu, logvar);
  parts.total = parts.diffusion + gamma * (parts.recon + beta_kl * parts.kl);
  if (!std::isfinite(parts.total)) throw DivergenceError("L-DiffRec: loss is not finite");
  if (grads == nullptr) return parts;

  Matrix d_logits = lsm.array().exp().matrix();
  const Vector mass = x.rowwise().sum();
  for (Eigen::Index r = 0; r < d_logits.rows(); ++r) d_logits.row(r) *= mass[r];
  d_logits = gamma * (d_logits - x) / batch;
  const auto d_logit_parts = SplitByCluster(d_logits, m.partition());
  Matrix d_zhat(z_hat.rows(), z_hat.cols());
  for (std::size_t c = 0; c < clusters; ++c) {
    d_zhat.middleCols(m.offset(c), m.latent_dims()[c]) =
        m.decoders()[c].Backward(dec_cache[c], d_logit_parts[c], grads->decoders[c]);
  }
  const Matrix d_z0 = diffusion.Backward(grads->denoiser, &d_zhat);
  const double kl_weight = gamma * beta_kl / batch;
  const Matrix d_mu = d_z0 + kl_weight * mu;
  const Matrix d_logvar = (d_z0.array() * noise.vae_eps.array() * 0.5 * sd.array() +
                           kl_weight * 0.5 * (logvar.array().exp() - 1.0))
                              .matrix();
  for (std::size_t c = 0; c < clusters; ++c) {
    const int dc = m.latent_dims()[c];
    Matrix d_h(x.rows(), 2 * dc);
    d_h.leftCols(dc) = d_mu.middleCols(m.offset(c), dc);
    d_h.rightCols(dc) = d_logvar.middleCols(m.offset(c), dc);
    m.encoders()[c].Backward(enc_cache[c], d_h, grads->encoders[c]);
  }
  return parts;
}

inline std::vector<Matrix*> LDiffRecParameters(LDiffRecModel& m) {
  std::vector<Matrix*> out;
  for (auto& e : m.encoders()) {
    auto p = e.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  for (auto& d : m.decoders()) {
    auto p = d.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  auto p = m.denoiser().parameters();
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline std::vector<const Matrix*> LDiffRecGradientRefs(const LDiffRecModel& m, const LDiffRecGrads& g) {
  std::vector<const Matrix*> out;
  for (std::size_t c = 0; c < g.encoders.size(); ++c) {
    auto r = m.encoders()[c].GradientRefs(g.encoders[c]);
    out.insert(out.end(), r.begin(), r.end());
  }
  for (std::size_t c = 0; c < g.decoders.size(); ++c) {
    auto r = m.decoders()[c].GradientRefs(g.decoders[c]);
    out.insert(out.end(), r.begin(), r.end());
  }
  auto r = m.denoiser().GradientRefs(g.denoiser);
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

// Joint training from a given partition.
inline LDiffRecModel FitLDiffRec(const ItemRows& train, ClusterPartition partition,
                                 const LDiffRecParams& hp, std::uint64_t seed,
                                 std::vector<double>* loss_curve = nullptr) {
  if (hp.epochs < 1 || hp.batch < 1 || !(hp.compression > 0)) {
    throw ConfigError("invalid L-DiffRec parameters");
  }
  const std::size_t num_items = partition.num_items();
  std::vector<std::uint32_t> users;
  for (std::size_t u = 0; u < train.size(); ++u) {
    if (!train[u].empty()) users.push_back(static_cast<std::uint32_t>(u));
  }
  if (users.empty()) throw DataError("L-DiffRec: empty train set");

  Rng root(seed);
  Rng init = root.Split("init");
  LDiffRecModel model = MakeLDiffRec(std::move(partition), hp, init);
  AdamState adam;
  adam.options.lr = hp.lr;
  LDiffRecGrads grads(model);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    Rng rng = root.Split("epoch").Split(static_cast<std::uint64_t>(epoch));
    rng.Shuffle(users);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < users.size(); start += static_cast<std::size_t>(hp.batch)) {
      const std::size_t end = std::min(users.size(), start + static_cast<std::size_t>(hp.batch));
      const Matrix x = HistoryMatrix(
          train, std::span<const std::uint32_t>(users.data() + start, end - start), num_items);
      const auto noise = DrawLDiffRecNoise(model, x.rows(), rng);
      grads.SetZero();
      const auto parts = LDiffRecLoss(model, x, noise, hp.gamma, hp.beta_kl, &grads);
      auto params = LDiffRecParameters(model);
      AdamUpdate(params, LDiffRecGradientRefs(model, grads), adam);
      epoch_loss += parts.total;
      ++batches;
    }
    if (loss_curve != nullptr) loss_curve->push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

// Full pipeline: embeddings, k-means, joint training.
inline LDiffRecModel FitLDiffRec(const ItemRows& train, std::size_t num_items,
                                 const LDiffRecParams& hp, std::uint64_t seed,
                                 std::vector<double>* loss_curve = nullptr) {
  Rng root(seed);
  const Matrix emb = PretrainItemEmbeddings(train, num_items, hp.embedding_dim,
                                            root.Split("embeddings").NextU64(), hp.embedding_epochs);
  auto km = KMeansCluster(emb, static_cast<std::size_t>(hp.clusters), root.Split("kmeans").NextU64());
  return FitLDiffRec(train, std::move(km.partition), hp, root.Split("joint").NextU64(), loss_curve);
}

}  // namespace fairdiff
