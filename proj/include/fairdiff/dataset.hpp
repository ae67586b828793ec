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
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairdiff/errors.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

enum class Gender : std::uint8_t { kMale, kFemale };
enum class ItemGroup : std::uint8_t { kHead, kTail };
enum class Phase : std::uint8_t { kTrain, kValidation, kTest };

inline char GenderCode(Gender g) { return g == Gender::kMale ? 'M' : 'F'; }
inline std::string_view ItemGroupName(ItemGroup g) {
  return g == ItemGroup::kHead ? "Head" : "Tail";
}

struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Users and items are dense indices into user_ids / item_ids, which are kept
// in IdLess order. Interactions are sorted by (user, timestamp, item).
struct Dataset {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<Interaction> interactions;
  std::vector<Gender> gender;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Numeric ids compare as integers, everything else lexicographically.
// Numeric ids sort before non-numeric ones.
struct IdLess {
  static bool IsNumeric(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
  }
  static std::string_view StripZeros(std::string_view s) {
    while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
    return s;
  }
  bool operator()(std::string_view a, std::string_view b) const {
    const bool na = IsNumeric(a), nb = IsNumeric(b);
    if (na && nb) {
      const auto sa = StripZeros(a), sb = StripZeros(b);
      if (sa.size() != sb.size()) return sa.size() < sb.size();
      if (sa != sb) return sa < sb;
      return a < b;
    }
    if (na != nb) return na;
    return a < b;
  }
};

namespace detail {

struct RawInteraction {
  std::string user;
  std::string item;
  std::int64_t timestamp;
};

inline std::vector<std::string_view> SplitOn(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
}

inline bool ParseInt(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
    if (s.size() == 1) return false;
  }
  std::int64_t value = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    if (value > (std::numeric_limits<std::int64_t>::max() - (s[i] - '0')) / 10) return false;
    value = value * 10 + (s[i] - '0');
  }
  out = negative ? -value : value;
  return true;
}

// Calls fn(line_number, fields) for every non-blank line.
template <typename Fn>
void ForEachRecord(const std::filesystem::path& path, std::string_view sep, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line_number, SplitOn(line, sep));
  }
}

inline Gender ParseGender(std::string_view value, const std::string& user) {
  if (value == "M") return Gender::kMale;
  if (value == "F") return Gender::kFemale;
  throw DataError("user " + user + " has invalid gender '" + std::string(value) +
                  "' (expected M or F)");
}

inline Dataset BuildDataset(const std::vector<RawInteraction>& raw,
                            const std::unordered_map<std::string, Gender>& genders) {
  // Keep the earliest timestamp of duplicate (user, item) pairs.
  std::map<std::pair<std::string, std::string>, std::int64_t> earliest;
  for (const auto& r : raw) {
    if (r.timestamp < 0) {
      throw DataError("negative timestamp for user " + r.user + ", item " + r.item);
    }
    auto [it, inserted] = earliest.emplace(std::make_pair(r.user, r.item), r.timestamp);
    if (!inserted) it->second = std::min(it->second, r.timestamp);
  }

  std::vector<std::string> users, items;
  for (const auto& [key, ts] : earliest) {
    users.push_back(key.first);
    items.push_back(key.second);
  }
  auto sort_unique = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end(), IdLess{});
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(users);
  sort_unique(items);

  std::unordered_map<std::string, std::uint32_t> user_index, item_index;
  for (std::size_t i = 0; i < users.size(); ++i) user_index[users[i]] = i;
  for (std::size_t i = 0; i < items.size(); ++i) item_index[items[i]] = i;

  Dataset d;
  d.gender.reserve(users.size());
  for (const auto& u : users) {
    auto it = genders.find(u);
    if (it == genders.end()) throw DataError("user " + u + " has no gender record");
    d.gender.push_back(it->second);
  }
  d.interactions.reserve(earliest.size());
  for (const auto& [key, ts] : earliest) {
    d.interactions.push_back({user_index.at(key.first), item_index.at(key.second), ts});
  }
  std::sort(d.interactions.begin(), d.interactions.end(),
            [](const Interaction& a, const Interaction& b) {
              return std::tie(a.user, a.timestamp, a.item) <
                     std::tie(b.user, b.timestamp, b.item);
            });
  d.user_ids = std::move(users);
  d.item_ids = std::move(items);
  return d;
}

}  // namespace detail

// MovieLens-1M `::` files. Every rating counts as one implicit interaction.
inline Dataset IngestMl1m(const std::filesystem::path& ratings_path,
                          const std::filesystem::path& users_path) {
  std::vector<detail::RawInteraction> raw;
  detail::ForEachRecord(ratings_path, "::", [&](std::size_t line, const auto& f) {
    std::int64_t user = 0, item = 0, rating = 0, ts = 0;
    if (f.size() != 4 || !detail::ParseInt(f[0], user) || !detail::ParseInt(f[1], item) ||
        !detail::ParseInt(f[2], rating) || !detail::ParseInt(f[3], ts)) {
      throw ParseError(ratings_path.string(), line,
                       "expected UserID::MovieID::Rating::Timestamp");
    }
    raw.push_back({std::string(f[0]), std::string(f[1]), ts});
  });

  std::unordered_map<std::string, Gender> genders;
  detail::ForEachRecord(users_path, "::", [&](std::size_t line, const auto& f) {
    std::int64_t user = 0;
    if (f.size() != 5 || !detail::ParseInt(f[0], user)) {
      throw ParseError(users_path.string(), line,
                       "expected UserID::Gender::Age::Occupation::Zip");
    }
    const std::string id(f[0]);
    genders[id] = detail::ParseGender(f[1], id);
  });
  return detail::BuildDataset(raw, genders);
}

// Canonical TSV pair: `user \t item \t timestamp` and `user \t gender`.
inline Dataset IngestCanonical(const std::filesystem::path& interactions_path,
                               const std::filesystem::path& users_path) {
  std::vector<detail::RawInteraction> raw;
  detail::ForEachRecord(interactions_path, "\t", [&](std::size_t line, const auto& f) {
    std::int64_t ts = 0;
    if (f.size() != 3 || f[0].empty() || f[1].empty() || !detail::ParseInt(f[2], ts)) {
      throw ParseError(interactions_path.string(), line,
                       "expected user_id<TAB>item_id<TAB>timestamp");
    }
    raw.push_back({std::string(f[0]), std::string(f[1]), ts});
  });

  std::unordered_map<std::string, Gender> genders;
  detail::ForEachRecord(users_path, "\t", [&](std::size_t line, const auto& f) {
    if (f.size() != 2 || f[0].empty()) {
      throw ParseError(users_path.string(), line, "expected user_id<TAB>gender");
    }
    const std::string id(f[0]);
    genders[id] = detail::ParseGender(f[1], id);
  });
  return detail::BuildDataset(raw, genders);
}

inline void WriteCanonical(const Dataset& d, const std::filesystem::path& interactions_path,
                           const std::filesystem::path& users_path) {
  std::ofstream inter(interactions_path);
  std::ofstream users(users_path);
  if (!inter || !users) throw DataError("cannot write canonical dataset");
  for (const auto& x : d.interactions) {
    inter << d.user_ids[x.user] << '\t' << d.item_ids[x.item] << '\t' << x.timestamp << '\n';
  }
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    users << d.user_ids[u] << '\t' << GenderCode(d.gender[u]) << '\n';
  }
}

// Iteratively drops users and items with fewer than n interactions until
// nothing changes, then re-indexes the survivors.
inline Dataset FilterMinInteractions(const Dataset& d, std::size_t n) {
  if (n < 1) throw ConfigError("min interactions must be >= 1");
  std::vector<char> keep(d.interactions.size(), 1);
  std::vector<std::size_t> user_count(d.num_users()), item_count(d.num_items());
  bool changed = true;
  while (changed) {
    changed = false;
    std::fill(user_count.begin(), user_count.end(), 0);
    std::fill(item_count.begin(), item_count.end(), 0);
    for (std::size_t k = 0; k < d.interactions.size(); ++k) {
      if (!keep[k]) continue;
      ++user_count[d.interactions[k].user];
      ++item_count[d.interactions[k].item];
    }
    for (std::size_t k = 0; k < d.interactions.size(); ++k) {
      if (!keep[k]) continue;
      const auto& x = d.interactions[k];
      if (user_count[x.user] < n || item_count[x.item] < n) {
        keep[k] = 0;
        changed = true;
      }
    }
  }

  std::vector<std::int64_t> user_map(d.num_users(), -1), item_map(d.num_items(), -1);
  Dataset out;
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    if (user_count[u] == 0) continue;
    user_map[u] = static_cast<std::int64_t>(out.user_ids.size());
    out.user_ids.push_back(d.user_ids[u]);
    out.gender.push_back(d.gender[u]);
  }
  for (std::size_t i = 0; i < d.num_items(); ++i) {
    if (item_count[i] == 0) continue;
    item_map[i] = static_cast<std::int64_t>(out.item_ids.size());
    out.item_ids.push_back(d.item_ids[i]);
  }
  for (std::size_t k = 0; k < d.interactions.size(); ++k) {
    if (!keep[k]) continue;
    const auto& x = d.interactions[k];
    out.interactions.push_back({static_cast<std::uint32_t>(user_map[x.user]),
                                static_cast<std::uint32_t>(item_map[x.item]), x.timestamp});
  }
  if (out.interactions.empty()) {
    throw DataError("dataset is empty after filtering with min interactions " +
                    std::to_string(n));
  }
  return out;
}

struct Event {
  std::uint32_t item = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

// Per-user chronological train/validation/test events plus the user and item
// group partitions used by the fairness metrics.
struct SplitDataset {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<std::vector<Event>> train;
  std::vector<std::vector<Event>> validation;
  std::vector<std::vector<Event>> test;
  std::vector<Gender> user_groups;
  std::vector<ItemGroup> item_groups;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }

  const std::vector<std::vector<Event>>& events(Phase phase) const {
    switch (phase) {
      case Phase::kTrain: return train;
      case Phase::kValidation: return validation;
      default: return test;
    }
  }

  // Item indices per user, ascending.
  std::vector<std::vector<std::uint32_t>> Rows(Phase phase) const {
    const auto& ev = events(phase);
    std::vector<std::vector<std::uint32_t>> rows(ev.size());
    for (std::size_t u = 0; u < ev.size(); ++u) {
      rows[u].reserve(ev[u].size());
      for (const auto& e : ev[u]) rows[u].push_back(e.item);
      std::sort(rows[u].begin(), rows[u].end());
    }
    return rows;
  }

  std::size_t Count(Phase phase) const {
    std::size_t n = 0;
    for (const auto& v : events(phase)) n += v.size();
    return n;
  }

  friend bool operator==(const SplitDataset&, const SplitDataset&) = default;
};

// Items sorted by train count descending (ties: ascending item index); the
// first round(head_fraction * |I|) become Head.
inline std::vector<ItemGroup> PartitionItemsByPopularity(
    const std::vector<std::vector<Event>>& train, std::size_t num_items,
    double head_fraction = 0.2) {
  std::vector<std::size_t> count(num_items, 0);
  std::size_t total = 0;
  for (const auto& events : train) {
    for (const auto& e : events) {
      ++count.at(e.item);
      ++total;
    }
  }
  if (total == 0) throw DataError("cannot partition items: train set is empty");
  std::vector<std::uint32_t> order(num_items);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return count[a] > count[b]; });
  const auto head =
      static_cast<std::size_t>(std::lround(head_fraction * static_cast<double>(num_items)));
  std::vector<ItemGroup> groups(num_items, ItemGroup::kTail);
  for (std::size_t r = 0; r < head && r < num_items; ++r) groups[order[r]] = ItemGroup::kHead;
  return groups;
}

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

// Per-user sizes: train = max(1, floor(r_train*m)), validation =
// floor(r_val*m), test = the remainder.
struct SplitSizes {
  std::size_t train, validation, test;
};

inline SplitSizes SplitSizesFor(std::size_t m, const SplitRatios& ratios = {}) {
  // The epsilon keeps products such as 0.7 * 10 from flooring to 6.
  auto floor_of = [m](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(m) + 1e-9));
  };
  const std::size_t train = std::max<std::size_t>(1, floor_of(ratios.train));
  const std::size_t validation = std::min(floor_of(ratios.validation), m - std::min(m, train));
  return {train, validation, m - std::min(m, train + validation)};
}

inline SplitDataset TemporalSplit(const Dataset& d, const SplitRatios& ratios = {},
                                  double head_fraction = 0.2) {
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  std::vector<std::vector<Event>> per_user(d.num_users());
  for (const auto& x : d.interactions) per_user.at(x.user).push_back({x.item, x.timestamp});

  SplitDataset s;
  s.user_ids = d.user_ids;
  s.item_ids = d.item_ids;
  s.user_groups = d.gender;
  s.train.resize(d.num_users());
  s.validation.resize(d.num_users());
  s.test.resize(d.num_users());
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    auto& events = per_user[u];
    if (events.size() < 3) {
      throw DataError("user " + d.user_ids[u] + " has " + std::to_string(events.size()) +
                      " interactions; temporal split needs at least 3");
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      return std::tie(a.timestamp, a.item) < std::tie(b.timestamp, b.item);
    });
    const auto sizes = SplitSizesFor(events.size(), ratios);
    const auto train_end = events.begin() + static_cast<std::ptrdiff_t>(sizes.train);
    const auto val_end = train_end + static_cast<std::ptrdiff_t>(sizes.validation);
    s.train[u].assign(events.begin(), train_end);
    s.validation[u].assign(train_end, val_end);
    s.test[u].assign(val_end, events.end());
  }
  s.item_groups = PartitionItemsByPopularity(s.train, s.num_items(), head_fraction);
  return s;
}

// Prepared-split directory: users.tsv, items.tsv and one events file per phase.
inline void SaveSplit(const SplitDataset& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream users(dir / "users.tsv");
  for (std::size_t u = 0; u < s.num_users(); ++u) {
    users << s.user_ids[u] << '\t' << GenderCode(s.user_groups[u]) << '\n';
  }
  std::ofstream items(dir / "items.tsv");
  for (std::size_t i = 0; i < s.num_items(); ++i) {
    items << s.item_ids[i] << '\t' << ItemGroupName(s.item_groups[i]) << '\n';
  }
  auto write_phase = [&](const std::vector<std::vector<Event>>& ev, const char* name) {
    std::ofstream out(dir / name);
    for (std::size_t u = 0; u < ev.size(); ++u) {
      for (const auto& e : ev[u]) {
        out << s.user_ids[u] << '\t' << s.item_ids[e.item] << '\t' << e.timestamp << '\n';
      }
    }
    if (!out) throw DataError("cannot write " + (dir / name).string());
  };
  write_phase(s.train, "train.tsv");
  write_phase(s.validation, "validation.tsv");
  write_phase(s.test, "test.tsv");
}

inline SplitDataset LoadSplit(const std::filesystem::path& dir) {
  SplitDataset s;
  std::unordered_map<std::string, std::uint32_t> user_index, item_index;
  detail::ForEachRecord(dir / "users.tsv", "\t", [&](std::size_t line, const auto& f) {
    if (f.size() != 2) throw ParseError((dir / "users.tsv").string(), line, "expected id<TAB>gender");
    const std::string id(f[0]);
    user_index[id] = static_cast<std::uint32_t>(s.user_ids.size());
    s.user_ids.push_back(id);
    s.user_groups.push_back(detail::ParseGender(f[1], id));
  });
  detail::ForEachRecord(dir / "items.tsv", "\t", [&](std::size_t line, const auto& f) {
    if (f.size() != 2 || (f[1] != "Head" && f[1] != "Tail")) {
      throw ParseError((dir / "items.tsv").string(), line, "expected id<TAB>{Head|Tail}");
    }
    item_index[std::string(f[0])] = static_cast<std::uint32_t>(s.item_ids.size());
    s.item_ids.emplace_back(f[0]);
    s.item_groups.push_back(f[1] == "Head" ? ItemGroup::kHead : ItemGroup::kTail);
  });
  auto read_phase = [&](std::vector<std::vector<Event>>& ev, const char* name) {
    ev.assign(s.num_users(), {});
    const auto path = dir / name;
    detail::ForEachRecord(path, "\t", [&](std::size_t line, const auto& f) {
      std::int64_t ts = 0;
      if (f.size() != 3 || !detail::ParseInt(f[2], ts)) {
        throw ParseError(path.string(), line, "expected user<TAB>item<TAB>timestamp");
      }
      auto u = user_index.find(std::string(f[0]));
      auto i = item_index.find(std::string(f[1]));
      if (u == user_index.end() || i == item_index.end()) {
        throw ParseError(path.string(), line, "unknown user or item id");
      }
      ev[u->second].push_back({i->second, ts});
    });
  };
  read_phase(s.train, "train.tsv");
  read_phase(s.validation, "validation.tsv");
  read_phase(s.test, "test.tsv");
  return s;
}

struct SyntheticConfig {
  std::size_t n_users = 200;
  std::size_t n_items = 100;
  double density = 0.1;
  double popularity_exponent = 1.0;
  double group_bias = 0.0;
  double female_fraction = 0.3;
  std::uint64_t seed = 42;
};

// Power-law item popularity w_i = (i+1)^-exponent. The top 20% of items by
// weight form the head quantile; male users weight head items by (1+b),
// female users by (1-b). Per-user counts vary uniformly in
// [0.5, 1.5) * density * n_items, at least 3.
inline Dataset GenerateSynthetic(const SyntheticConfig& cfg) {
  if (cfg.n_users < 2 || cfg.n_items < 2) throw ConfigError("synthetic counts must be >= 2");
  if (!(cfg.density > 0 && cfg.density < 1)) throw ConfigError("density must be in (0,1)");
  if (!(cfg.group_bias >= 0 && cfg.group_bias <= 1)) {
    throw ConfigError("group_bias must be in [0,1]");
  }
  if (!(cfg.female_fraction > 0 && cfg.female_fraction < 1)) {
    throw ConfigError("female_fraction must be in (0,1)");
  }
  const double requested =
      cfg.density * static_cast<double>(cfg.n_users) * static_cast<double>(cfg.n_items);
  if (requested > static_cast<double>(cfg.n_users * cfg.n_items)) {
    throw ConfigError("density requests more pairs than n_users * n_items");
  }

  Rng root(cfg.seed);
  const auto head_items = static_cast<std::size_t>(
      std::lround(0.2 * static_cast<double>(cfg.n_items)));
  std::vector<double> base(cfg.n_items);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    base[i] = std::pow(static_cast<double>(i + 1), -cfg.popularity_exponent);
  }

  Dataset d;
  for (std::size_t u = 0; u < cfg.n_users; ++u) d.user_ids.push_back(std::to_string(u));
  for (std::size_t i = 0; i < cfg.n_items; ++i) d.item_ids.push_back(std::to_string(i));

  Rng gender_rng = root.Split("gender");
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    d.gender.push_back(gender_rng.Uniform() < cfg.female_fraction ? Gender::kFemale
                                                                  : Gender::kMale);
  }

  const std::size_t min_count = std::min<std::size_t>(3, cfg.n_items);
  std::vector<std::pair<double, std::uint32_t>> keys(cfg.n_items);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    Rng rng = root.Split("user").Split(u);
    const double head_scale =
        d.gender[u] == Gender::kMale ? 1.0 + cfg.group_bias : 1.0 - cfg.group_bias;
    const double target = cfg.density * static_cast<double>(cfg.n_items) * (0.5 + rng.Uniform());
    const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(target)),
                                               min_count, cfg.n_items);
    // Efraimidis-Spirakis weighted sampling without replacement.
    for (std::size_t i = 0; i < cfg.n_items; ++i) {
      const double w = base[i] * (i < head_items ? head_scale : 1.0);
      double r = rng.Uniform();
      while (r <= 0.0) r = rng.Uniform();
      const double key = w > 0 ? std::log(r) / w : -std::numeric_limits<double>::infinity();
      keys[i] = {key, static_cast<std::uint32_t>(i)};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    for (std::size_t k = 0; k < count; ++k) {
      const auto ts = static_cast<std::int64_t>(1'000'000'000 + rng.Below(10'000'000));
      d.interactions.push_back({static_cast<std::uint32_t>(u), keys[k].second, ts});
    }
  }
  std::sort(d.interactions.begin(), d.interactions.end(),
            [](const Interaction& a, const Interaction& b) {
              return std::tie(a.user, a.timestamp, a.item) <
                     std::tie(b.user, b.timestamp, b.item);
            });
  return d;
}

// Summary statistics in the layout of a dataset table.
struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  double sparsity = 0.0;
  double male_share = 0.0;
};

inline DatasetStats ComputeStats(const Dataset& d) {
  DatasetStats st;
  st.users = d.num_users();
  st.items = d.num_items();
  st.interactions = d.interactions.size();
  if (st.users > 0 && st.items > 0) {
    st.sparsity = 1.0 - static_cast<double>(st.interactions) /
                            (static_cast<double>(st.users) * static_cast<double>(st.items));
    st.male_share = static_cast<double>(std::count(d.gender.begin(), d.gender.end(), Gender::kMale)) /
                    static_cast<double>(st.users);
  }
  return st;
}

}  // namespace fairdiff
