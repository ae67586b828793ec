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

#include <cstdint>
#include <filesystem>
#include <string>

#include "fairdiff/checkpoint.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/recommender.hpp"

namespace fairdiff {

// Closed-form shallow autoencoder: scores = x_u B with diag(B) = 0.
class EaseModel final : public Recommender {
 public:
  EaseModel(Matrix weights, double lambda) : weights_(std::move(weights)), lambda_(lambda) {}

  std::string name() const override { return "ease"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  double lambda() const { return lambda_; }

  Vector ScoreUser(const Vector& history, std::uint32_t) const override {
    return weights_.transpose() * history;
  }

  Matrix ScoreUsers(const Matrix& histories, std::span<const std::uint32_t>) const override {
    return histories * weights_;
  }

  // Dense row-major dump of B inside the checkpoint container.
  void Save(const std::filesystem::path& path) const override {
    Checkpoint ck;
    ck.header["model"] = "ease";
    ck.header["lambda"] = lambda_;
    ck.PutMatrix("B", weights_);
    ck.Save(path);
  }

  static EaseModel FromCheckpoint(const Checkpoint& ck) {
    return EaseModel(ck.GetMatrix("B"), ck.header.at("lambda").get<double>());
  }

 private:
  Matrix weights_;
  double lambda_;
};

// G = X^T X + lambda I, P = G^-1, B = I - P diag(1/diag(P)), diag(B) := 0.
inline EaseModel FitEase(const ItemRows& train, std::size_t num_items, double lambda) {
  if (!(lambda > 0)) throw ConfigError("EASE lambda must be positive");
  Matrix g = Cooccurrence(train, num_items);
  g.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw DataError("EASE: Gram matrix is not positive definite");
  const auto n = static_cast<Eigen::Index>(num_items);
  Matrix p = llt.solve(Matrix::Identity(n, n));
  if (!p.allFinite()) throw DataError("EASE: inverse is not finite");
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -p(i, j) / p(j, j);
  }
  b.diagonal().setZero();
  return EaseModel(std::move(b), lambda);
}

}  // namespace fairdiff
