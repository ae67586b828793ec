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
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairdiff/errors.hpp"
#include "fairdiff/recommender.hpp"

namespace fairdiff {

// Scores every item by its train interaction count, ignoring the user.
class PopularityModel final : public Recommender {
 public:
  explicit PopularityModel(Vector counts) : counts_(std::move(counts)) {}

  std::string name() const override { return "pop"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(counts_.size()); }
  Vector ScoreUser(const Vector&, std::uint32_t) const override { return counts_; }
  const Vector& counts() const { return counts_; }

  void Save(const std::filesystem::path& path) const override {
    std::ofstream out(path);
    out << "# pop " << counts_.size() << '\n';
    for (Eigen::Index i = 0; i < counts_.size(); ++i) out << counts_[i] << '\n';
  }

 private:
  Vector counts_;
};

inline PopularityModel FitPopularity(const ItemRows& train, std::size_t num_items) {
  Vector counts = Vector::Zero(static_cast<Eigen::Index>(num_items));
  for (const auto& row : train) {
    for (auto i : row) counts[i] += 1.0;
  }
  return PopularityModel(std::move(counts));
}

// Cosine item-item neighbourhood model, rows truncated to the top-n
// neighbours (ties by ascending item id), diagonal excluded.
class ItemKnnModel final : public Recommender {
 public:
  using Row = std::vector<std::pair<std::uint32_t, double>>;

  ItemKnnModel(std::size_t neighbors, std::vector<Row> rows)
      : neighbors_(neighbors), rows_(std::move(rows)) {}

  std::string name() const override { return "itemknn"; }
  std::size_t num_items() const override { return rows_.size(); }
  std::size_t neighbors() const { return neighbors_; }
  const std::vector<Row>& rows() const { return rows_; }

  double Similarity(std::uint32_t i, std::uint32_t j) const {
    for (const auto& [k, s] : rows_.at(i)) {
      if (k == j) return s;
    }
    return 0.0;
  }

  Vector ScoreUser(const Vector& history, std::uint32_t) const override {
    Vector scores(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      double s = 0.0;
      for (const auto& [j, sim] : rows_[i]) s += sim * history[j];
      scores[static_cast<Eigen::Index>(i)] = s;
    }
    return scores;
  }

  // Sparse triplet text file: a header line, then `i \t j \t sim`.
  void Save(const std::filesystem::path& path) const override {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "# itemknn " << rows_.size() << ' ' << neighbors_ << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      for (const auto& [j, s] : rows_[i]) out << i << '\t' << j << '\t' << s << '\n';
    }
  }

  static bool Sniff(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string tag;
    in >> tag >> tag;
    return tag == "itemknn";
  }

  static ItemKnnModel Load(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string hash, tag;
    std::size_t n = 0, neighbors = 0;
    if (!(in >> hash >> tag >> n >> neighbors) || tag != "itemknn") {
      throw DataError(path.string() + " is not an itemknn triplet file");
    }
    std::vector<Row> rows(n);
    std::size_t i = 0, j = 0;
    std::string value;
    while (in >> i >> j >> value) {
      if (i >= n || j >= n) throw DataError("itemknn triplet out of range in " + path.string());
      rows[i].emplace_back(static_cast<std::uint32_t>(j), std::stod(value));
    }
    return ItemKnnModel(neighbors, std::move(rows));
  }

 private:
  std::size_t neighbors_;
  std::vector<Row> rows_;
};

// Untruncated cosine similarity |U_i & U_j| / sqrt(|U_i| |U_j|).
inline Matrix CosineSimilarity(const ItemRows& train, std::size_t num_items) {
  Matrix co = Cooccurrence(train, num_items);
  const Vector counts = co.diagonal();
  for (Eigen::Index i = 0; i < co.rows(); ++i) {
    for (Eigen::Index j = 0; j < co.cols(); ++j) {
      const double denom = std::sqrt(counts[i] * counts[j]);
      co(i, j) = denom > 0 ? std::min(1.0, co(i, j) / denom) : 0.0;
    }
  }
  return co;
}

inline ItemKnnModel FitItemKnn(const ItemRows& train, std::size_t num_items, std::size_t neighbors) {
  if (neighbors < 1) throw ConfigError("itemknn needs at least one neighbour");
  const Matrix sim = CosineSimilarity(train, num_items);
  std::vector<ItemKnnModel::Row> rows(num_items);
  std::vector<std::pair<std::uint32_t, double>> candidates;
  for (std::size_t i = 0; i < num_items; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < num_items; ++j) {
      const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (j != i && s > 0) candidates.emplace_back(static_cast<std::uint32_t>(j), s);
    }
    const std::size_t keep = std::min(neighbors, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const auto& a, const auto& b) {
                        return a.second != b.second ? a.second > b.second : a.first < b.first;
                      });
    candidates.resize(keep);
    std::sort(candidates.begin(), candidates.end());
    rows[i] = candidates;
  }
  return ItemKnnModel(neighbors, std::move(rows));
}

}  // namespace fairdiff
