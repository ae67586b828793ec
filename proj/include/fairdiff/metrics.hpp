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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairdiff/dataset.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/recommender.hpp"

namespace fairdiff {

// Top-k recommendation lists; lists[n] belongs to users[n], position p is
// lists[n][p - 1].
struct TopKLists {
  std::size_t k = 20;
  std::vector<std::uint32_t> users;
  std::vector<std::vector<std::uint32_t>> lists;

  friend bool operator==(const TopKLists&, const TopKLists&) = default;
};

inline double PositionDiscount(std::size_t position) {
  return 1.0 / std::log2(static_cast<double>(position) + 1.0);
}

namespace detail {
inline bool Contains(std::span<const std::uint32_t> sorted, std::uint32_t item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}
}  // namespace detail

// |top-k & R| / |R|. `relevant` must be sorted.
inline double RecallAtK(std::span<const std::uint32_t> list, std::span<const std::uint32_t> relevant,
                        std::size_t k) {
  if (relevant.empty()) throw DataError("recall is undefined for an empty relevant set");
  std::size_t hits = 0;
  for (std::size_t p = 0; p < std::min(k, list.size()); ++p) hits += detail::Contains(relevant, list[p]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

// Binary-gain nDCG with discount 1/log2(p + 1).
inline double NdcgAtK(std::span<const std::uint32_t> list, std::span<const std::uint32_t> relevant,
                      std::size_t k) {
  if (relevant.empty()) throw DataError("nDCG is undefined for an empty relevant set");
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, list.size()); ++p) {
    if (detail::Contains(relevant, list[p])) dcg += PositionDiscount(p + 1);
  }
  for (std::size_t p = 1; p <= std::min(k, relevant.size()); ++p) idcg += PositionDiscount(p);
  return dcg / idcg;
}

struct GroupMeans {
  double male = 0.0;
  double female = 0.0;
  std::size_t male_users = 0;
  std::size_t female_users = 0;

  double gap() const { return std::abs(male - female); }
};

inline GroupMeans GroupAverages(std::span<const double> values, std::span<const Gender> groups) {
  if (values.size() != groups.size()) throw DimensionError("group_gap: value/group count mismatch");
  GroupMeans g;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (groups[n] == Gender::kMale) {
      g.male += values[n];
      ++g.male_users;
    } else {
      g.female += values[n];
      ++g.female_users;
    }
  }
  if (g.male_users == 0) throw DataError("group M has no evaluated users");
  if (g.female_users == 0) throw DataError("group F has no evaluated users");
  g.male /= static_cast<double>(g.male_users);
  g.female /= static_cast<double>(g.female_users);
  return g;
}

// |mean over M - mean over F|.
inline double GroupGap(std::span<const double> values, std::span<const Gender> groups) {
  return GroupAverages(values, groups).gap();
}

// Mean share of Tail items per list.
inline double Aplt(const std::vector<std::vector<std::uint32_t>>& lists,
                   std::span<const ItemGroup> item_groups) {
  if (lists.empty()) throw DataError("APLT needs at least one list");
  double total = 0.0;
  for (const auto& list : lists) {
    if (list.empty()) continue;
    std::size_t tail = 0;
    for (auto i : list) tail += item_groups[i] == ItemGroup::kTail;
    total += static_cast<double>(tail) / static_cast<double>(list.size());
  }
  return total / static_cast<double>(lists.size());
}

// |E_head - E_tail| / (E_head + E_tail), exposure discounted by 1/log2(p + 1).
inline double DeltaExposure(const std::vector<std::vector<std::uint32_t>>& lists,
                            std::span<const ItemGroup> item_groups) {
  double head = 0.0, tail = 0.0;
  for (const auto& list : lists) {
    for (std::size_t p = 0; p < list.size(); ++p) {
      (item_groups[list[p]] == ItemGroup::kHead ? head : tail) += PositionDiscount(p + 1);
    }
  }
  if (head + tail <= 0.0) throw DataError("total exposure is zero");
  return std::abs(head - tail) / (head + tail);
}

// Six metrics as fractions in [0, 1]; emitters scale to percentages.
struct MetricReport {
  std::size_t k = 20;
  double recall = 0, ndcg = 0, delta_recall = 0, delta_ndcg = 0, aplt = 0, delta_exp = 0;
  std::vector<std::uint32_t> users;
  std::vector<double> user_recall;
  std::vector<double> user_ndcg;
  GroupMeans recall_groups;
  GroupMeans ndcg_groups;

  friend bool operator==(const MetricReport& a, const MetricReport& b) {
    auto same = [](const GroupMeans& x, const GroupMeans& y) {
      return x.male == y.male && x.female == y.female && x.male_users == y.male_users &&
             x.female_users == y.female_users;
    };
    return a.k == b.k && a.recall == b.recall && a.ndcg == b.ndcg && a.delta_recall == b.delta_recall &&
           a.delta_ndcg == b.delta_ndcg && a.aplt == b.aplt && a.delta_exp == b.delta_exp &&
           a.users == b.users && a.user_recall == b.user_recall && a.user_ndcg == b.user_ndcg &&
           same(a.recall_groups, b.recall_groups) && same(a.ndcg_groups, b.ndcg_groups);
  }
};

// `relevant[u]` holds user u's sorted test items; lists must cover exactly
// the users whose relevant set is nonempty.
inline MetricReport EvaluateRun(const TopKLists& lists, const ItemRows& relevant,
                                std::span<const Gender> user_groups,
                                std::span<const ItemGroup> item_groups, std::size_t k) {
  std::size_t expected = 0;
  for (const auto& r : relevant) expected += !r.empty();
  if (lists.users.size() != expected || lists.lists.size() != expected) {
    throw DataError("lists must cover exactly the users with a nonempty test set");
  }
  MetricReport rep;
  rep.k = k;
  rep.users = lists.users;
  std::vector<Gender> groups;
  for (std::size_t n = 0; n < lists.users.size(); ++n) {
    const auto u = lists.users[n];
    if (relevant.at(u).empty()) throw DataError("list given for a user without test items");
    rep.user_recall.push_back(RecallAtK(lists.lists[n], relevant[u], k));
    rep.user_ndcg.push_back(NdcgAtK(lists.lists[n], relevant[u], k));
    groups.push_back(user_groups[u]);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  rep.recall = mean(rep.user_recall);
  rep.ndcg = mean(rep.user_ndcg);
  rep.recall_groups = GroupAverages(rep.user_recall, groups);
  rep.ndcg_groups = GroupAverages(rep.user_ndcg, groups);
  rep.delta_recall = rep.recall_groups.gap();
  rep.delta_ndcg = rep.ndcg_groups.gap();
  rep.aplt = Aplt(lists.lists, item_groups);
  rep.delta_exp = DeltaExposure(lists.lists, item_groups);
  return rep;
}

inline void to_json(nlohmann::json& j, const GroupMeans& g) {
  j = {{"M", g.male}, {"F", g.female}, {"M_users", g.male_users}, {"F_users", g.female_users}};
}

inline void from_json(const nlohmann::json& j, GroupMeans& g) {
  g.male = j.at("M").get<double>();
  g.female = j.at("F").get<double>();
  g.male_users = j.at("M_users").get<std::size_t>();
  g.female_users = j.at("F_users").get<std::size_t>();
}

inline void to_json(nlohmann::json& j, const MetricReport& r) {
  j = {{"k", r.k},
       {"recall", r.recall},
       {"ndcg", r.ndcg},
       {"delta_recall", r.delta_recall},
       {"delta_ndcg", r.delta_ndcg},
       {"aplt", r.aplt},
       {"delta_exp", r.delta_exp},
       {"users", r.users},
       {"user_recall", r.user_recall},
       {"user_ndcg", r.user_ndcg},
       {"recall_groups", r.recall_groups},
       {"ndcg_groups", r.ndcg_groups}};
}

inline void from_json(const nlohmann::json& j, MetricReport& r) {
  r.k = j.at("k").get<std::size_t>();
  r.recall = j.at("recall").get<double>();
  r.ndcg = j.at("ndcg").get<double>();
  r.delta_recall = j.at("delta_recall").get<double>();
  r.delta_ndcg = j.at("delta_ndcg").get<double>();
  r.aplt = j.at("aplt").get<double>();
  r.delta_exp = j.at("delta_exp").get<double>();
  r.users = j.at("users").get<std::vector<std::uint32_t>>();
  r.user_recall = j.at("user_recall").get<std::vector<double>>();
  r.user_ndcg = j.at("user_ndcg").get<std::vector<double>>();
  r.recall_groups = j.at("recall_groups").get<GroupMeans>();
  r.ndcg_groups = j.at("ndcg_groups").get<GroupMeans>();
}

inline void to_json(nlohmann::json& j, const TopKLists& l) {
  j = {{"k", l.k}, {"users", l.users}, {"lists", l.lists}};
}

inline void from_json(const nlohmann::json& j, TopKLists& l) {
  l.k = j.at("k").get<std::size_t>();
  l.users = j.at("users").get<std::vector<std::uint32_t>>();
  l.lists = j.at("lists").get<std::vector<std::vector<std::uint32_t>>>();
}

}  // namespace fairdiff
