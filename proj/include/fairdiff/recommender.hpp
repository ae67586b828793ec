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
#include <span>
#include <string>
#include <vector>

#include "fairdiff/nncore.hpp"

namespace fairdiff {

using ItemRows = std::vector<std::vector<std::uint32_t>>;

// Scoring contract shared by every model: map a user's train interaction
// vector to one real score per item. Trained models are read-only.
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_items() const = 0;

  virtual Vector ScoreUser(const Vector& history, std::uint32_t user) const = 0;

  // Rows of `histories` are users. Models with a batched path override this.
  virtual Matrix ScoreUsers(const Matrix& histories, std::span<const std::uint32_t> users) const {
    Matrix out(histories.rows(), static_cast<Eigen::Index>(num_items()));
    for (Eigen::Index r = 0; r < histories.rows(); ++r) {
      out.row(r) = ScoreUser(histories.row(r).transpose(), users[static_cast<std::size_t>(r)]).transpose();
    }
    return out;
  }

  virtual void Save(const std::filesystem::path& path) const = 0;
};

inline Vector HistoryVector(std::span<const std::uint32_t> items, std::size_t num_items) {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(num_items));
  for (auto i : items) x[i] = 1.0;
  return x;
}

inline Matrix HistoryMatrix(const ItemRows& rows, std::span<const std::uint32_t> users,
                            std::size_t num_items) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(users.size()),
                          static_cast<Eigen::Index>(num_items));
  for (std::size_t r = 0; r < users.size(); ++r) {
    for (auto i : rows[users[r]]) x(static_cast<Eigen::Index>(r), i) = 1.0;
  }
  return x;
}

// Dense item-item co-occurrence X^T X of a binary user-item matrix.
inline Matrix Cooccurrence(const ItemRows& rows, std::size_t num_items) {
  const auto n = static_cast<Eigen::Index>(num_items);
  Matrix g = Matrix::Zero(n, n);
  for (const auto& row : rows) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      double* line = g.row(row[a]).data();
      for (std::size_t b = 0; b < row.size(); ++b) line[row[b]] += 1.0;
    }
  }
  return g;
}

}  // namespace fairdiff
