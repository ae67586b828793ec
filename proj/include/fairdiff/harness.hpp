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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairdiff/dataset.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/metrics.hpp"
#include "fairdiff/models.hpp"
#include "fairdiff/recommender.hpp"

namespace fairdiff {

// Scores every user that has ground truth in `phase` from their train
// vector, masks train items (and validation items for the test phase) and
// keeps the k best, ties broken by ascending item id. `short_lists` is set
// when fewer than k items remain unmasked for some user.
inline TopKLists RecommendTopK(const Recommender& model, const SplitDataset& split, Phase phase,
                               std::size_t k, bool* short_lists = nullptr,
                               std::size_t chunk = 256) {
  if (phase == Phase::kTrain) throw ConfigError("top-k lists are built for validation or test");
  const ItemRows train = split.Rows(Phase::kTrain);
  const ItemRows validation = split.Rows(Phase::kValidation);
  const auto& truth = split.events(phase);
  TopKLists out;
  out.k = k;
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    if (!truth[u].empty()) out.users.push_back(static_cast<std::uint32_t>(u));
  }
  if (short_lists != nullptr) *short_lists = false;
  const double masked = -std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> order;
  for (std::size_t start = 0; start < out.users.size(); start += chunk) {
    const std::size_t end = std::min(out.users.size(), start + chunk);
    std::span<const std::uint32_t> users(out.users.data() + start, end - start);
    Matrix scores = model.ScoreUsers(HistoryMatrix(train, users, split.num_items()), users);
    for (std::size_t r = 0; r < users.size(); ++r) {
      auto row = scores.row(static_cast<Eigen::Index>(r));
      for (auto i : train[users[r]]) row[i] = masked;
      if (phase == Phase::kTest) {
        for (auto i : validation[users[r]]) row[i] = masked;
      }
      order.clear();
      for (Eigen::Index i = 0; i < row.size(); ++i) {
        if (row[i] != masked) order.push_back(static_cast<std::uint32_t>(i));
      }
      const std::size_t keep = std::min(k, order.size());
      if (keep < k && short_lists != nullptr) *short_lists = true;
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                        [&](std::uint32_t a, std::uint32_t b) {
                          return row[a] != row[b] ? row[a] > row[b] : a < b;
                        });
      order.resize(keep);
      out.lists.push_back(order);
    }
  }
  return out;
}

// Number of list entries that hit a masked item for `phase`.
inline std::size_t CountMaskViolations(const TopKLists& lists, const SplitDataset& split, Phase phase) {
  const ItemRows train = split.Rows(Phase::kTrain);
  const ItemRows validation = split.Rows(Phase::kValidation);
  std::size_t bad = 0;
  for (std::size_t n = 0; n < lists.users.size(); ++n) {
    const auto u = lists.users[n];
    for (auto i : lists.lists[n]) {
      bad += std::binary_search(train[u].begin(), train[u].end(), i);
      if (phase == Phase::kTest) bad += std::binary_search(validation[u].begin(), validation[u].end(), i);
    }
  }
  return bad;
}

inline MetricReport EvaluateModel(const Recommender& model, const SplitDataset& split, Phase phase,
                                  std::size_t k, bool* short_lists = nullptr) {
  const TopKLists lists = RecommendTopK(model, split, phase, k, short_lists);
  return EvaluateRun(lists, split.Rows(phase), split.user_groups, split.item_groups, k);
}

// Mean Recall@k over users with validation items; no fairness terms needed.
inline double ValidationRecall(const Recommender& model, const SplitDataset& split, std::size_t k) {
  const TopKLists lists = RecommendTopK(model, split, Phase::kValidation, k);
  const ItemRows truth = split.Rows(Phase::kValidation);
  double total = 0;
  for (std::size_t n = 0; n < lists.users.size(); ++n) {
    total += RecallAtK(lists.lists[n], truth[lists.users[n]], k);
  }
  return lists.users.empty() ? 0.0 : total / static_cast<double>(lists.users.size());
}

// Cartesian product of an ordered grid; the first key varies slowest.
inline std::vector<nlohmann::ordered_json> ExpandGrid(const nlohmann::ordered_json& grid) {
  std::vector<nlohmann::ordered_json> points = {nlohmann::ordered_json::object()};
  if (grid.is_null()) return points;
  if (!grid.is_object()) throw ConfigError("grid must be a JSON object of value lists");
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("grid entry '" + key + "' must be a nonempty list");
    }
    std::vector<nlohmann::ordered_json> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        auto q = p;
        q[key] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

inline std::uint64_t DefaultSeed() {
  if (const char* env = std::getenv("FAIRDIFF_SEED")) {
    std::int64_t v = 0;
    if (detail::ParseInt(env, v) && v >= 0) return static_cast<std::uint64_t>(v);
    throw ConfigError("FAIRDIFF_SEED must be a non-negative integer");
  }
  return 42;
}

struct ExperimentConfig {
  std::string dataset_name;
  nlohmann::json dataset;  // {"kind": ml1m|canonical|synthetic|prepared, ...}
  std::string model;
  nlohmann::ordered_json grid = nlohmann::ordered_json::object();
  std::size_t k = 20;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "runs";
  std::vector<std::uint64_t> seeds;  // multi-seed mode when nonempty

  static ExperimentConfig FromJson(const nlohmann::ordered_json& j) {
    ExperimentConfig c;
    c.dataset = nlohmann::json::parse(j.at("dataset").dump());
    c.dataset_name = j.at("dataset").value("name", c.dataset.value("kind", std::string("dataset")));
    c.model = j.at("model").get<std::string>();
    if (!IsKnownModel(c.model)) throw ConfigError("unknown model '" + c.model + "'");
    c.grid = j.contains("grid") ? j.at("grid") : DefaultGrid(c.model);
    c.k = j.value("k", std::size_t{20});
    c.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : DefaultSeed();
    c.output_dir = j.value("output_dir", std::string("runs"));
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (ExpandGrid(c.grid).empty()) throw ConfigError("grid is empty");
    return c;
  }
};

inline SyntheticConfig SyntheticConfigFrom(const nlohmann::json& j) {
  SyntheticConfig c;
  c.n_users = j.value("n_users", c.n_users);
  c.n_items = j.value("n_items", c.n_items);
  c.density = j.value("density", c.density);
  c.popularity_exponent = j.value("popularity_exponent", c.popularity_exponent);
  c.group_bias = j.value("group_bias", c.group_bias);
  c.female_fraction = j.value("female_fraction", c.female_fraction);
  c.seed = j.value("seed", c.seed);
  return c;
}

// Loads, filters and splits the dataset described by a config block.
inline SplitDataset PrepareDataset(const nlohmann::json& spec) {
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "prepared") return LoadSplit(spec.at("dir").get<std::string>());
  Dataset d;
  if (kind == "ml1m") {
    d = IngestMl1m(spec.at("ratings").get<std::string>(), spec.at("users").get<std::string>());
  } else if (kind == "canonical") {
    d = IngestCanonical(spec.at("interactions").get<std::string>(), spec.at("users").get<std::string>());
  } else if (kind == "synthetic") {
    d = GenerateSynthetic(SyntheticConfigFrom(spec));
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }
  const auto min_inter = spec.value("min_interactions", kind == "synthetic" ? std::size_t{3} : std::size_t{20});
  d = FilterMinInteractions(d, min_inter);
  return TemporalSplit(d, {}, spec.value("head_fraction", 0.2));
}

struct GridPointResult {
  nlohmann::ordered_json hyperparameters;
  std::optional<double> validation_recall;  // empty when training failed
  std::string error;

  friend bool operator==(const GridPointResult&, const GridPointResult&) = default;
};

struct RunRecord {
  std::string model;
  std::string dataset;
  std::uint64_t seed = 0;
  nlohmann::ordered_json hyperparameters;
  double validation_recall = 0;
  std::optional<MetricReport> test;
  double wall_seconds = 0;
  bool short_lists = false;
  std::vector<GridPointResult> grid;
  std::string checkpoint;
  std::string error;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline void to_json(nlohmann::ordered_json& j, const RunRecord& r) {
  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  for (const auto& g : r.grid) {
    nlohmann::ordered_json p = {{"hyperparameters", g.hyperparameters}};
    p["validation_recall"] = g.validation_recall ? nlohmann::ordered_json(*g.validation_recall)
                                                 : nlohmann::ordered_json(nullptr);
    if (!g.error.empty()) p["error"] = g.error;
    grid.push_back(std::move(p));
  }
  j = {{"model", r.model},
       {"dataset", r.dataset},
       {"seed", r.seed},
       {"hyperparameters", r.hyperparameters},
       {"validation_recall", r.validation_recall},
       {"test", r.test ? nlohmann::ordered_json::parse(nlohmann::json(*r.test).dump())
                       : nlohmann::ordered_json(nullptr)},
       {"wall_seconds", r.wall_seconds},
       {"short_lists", r.short_lists},
       {"grid", grid},
       {"checkpoint", r.checkpoint}};
  if (!r.error.empty()) j["error"] = r.error;
}

inline void from_json(const nlohmann::ordered_json& j, RunRecord& r) {
  r.model = j.at("model").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.hyperparameters = j.at("hyperparameters");
  r.validation_recall = j.at("validation_recall").get<double>();
  if (j.at("test").is_null()) {
    r.test.reset();
  } else {
    r.test = nlohmann::json::parse(j.at("test").dump()).get<MetricReport>();
  }
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.short_lists = j.at("short_lists").get<bool>();
  r.grid.clear();
  for (const auto& p : j.at("grid")) {
    GridPointResult g;
    g.hyperparameters = p.at("hyperparameters");
    if (!p.at("validation_recall").is_null()) g.validation_recall = p.at("validation_recall").get<double>();
    g.error = p.value("error", std::string());
    r.grid.push_back(std::move(g));
  }
  r.checkpoint = j.value("checkpoint", std::string());
  r.error = j.value("error", std::string());
}

// JSON-lines, append-only.
inline void AppendRecord(const RunRecord& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot append to " + path.string());
  out << nlohmann::ordered_json(r).dump() << '\n';
}

inline std::vector<RunRecord> LoadRecords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::ordered_json::parse(line).get<RunRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), n, e.what());
    }
  }
  return out;
}

struct GridSearchResult {
  RunRecord record;
  std::unique_ptr<Recommender> model;
};

// Trains every grid point with the same seed, keeps the best validation
// Recall@k (first in grid order on ties) and evaluates it on test. Failed
// points are recorded and skipped; all failing is an error.
inline GridSearchResult GridSearch(const ExperimentConfig& cfg, const SplitDataset& split) {
  const auto start = std::chrono::steady_clock::now();
  const ItemRows train = split.Rows(Phase::kTrain);
  GridSearchResult result;
  RunRecord& rec = result.record;
  rec.model = cfg.model;
  rec.dataset = cfg.dataset_name;
  rec.seed = cfg.seed;
  std::optional<std::size_t> best;
  for (const auto& point : ExpandGrid(cfg.grid)) {
    GridPointResult g;
    g.hyperparameters = point;
    try {
      auto model = FitModel(cfg.model, train, split.num_items(), nlohmann::json::parse(point.dump()),
                            cfg.seed);
      g.validation_recall = ValidationRecall(*model, split, cfg.k);
      if (!best || *g.validation_recall > *rec.grid[*best].validation_recall) {
        best = rec.grid.size();
        result.model = std::move(model);
      }
    } catch (const std::exception& e) {
      g.error = e.what();
    }
    rec.grid.push_back(std::move(g));
  }
  if (!best) {
    throw DataError("every grid point failed for " + cfg.model + " on " + cfg.dataset_name +
                    (rec.grid.empty() ? "" : ": " + rec.grid.front().error));
  }
  rec.hyperparameters = rec.grid[*best].hyperparameters;
  rec.validation_recall = *rec.grid[*best].validation_recall;
  rec.test = EvaluateModel(*result.model, split, Phase::kTest, cfg.k, &rec.short_lists);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Metric triple shown on the trade-off chart.
struct RadarPoint {
  double ndcg = 0;
  double delta_ndcg = 0;
  double aplt = 0;
};

// Per-metric min-max to [0, 1]; delta_ndcg is flipped so that higher is
// better. A metric whose range is zero maps to 1 for every model.
inline std::vector<std::pair<std::string, RadarPoint>> NormalizeForRadar(
    const std::vector<std::pair<std::string, RadarPoint>>& values) {
  auto normalize = [&](double RadarPoint::*field, bool flip) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [name, p] : values) {
      lo = std::min(lo, p.*field);
      hi = std::max(hi, p.*field);
    }
    std::vector<double> out;
    for (const auto& [name, p] : values) {
      if (hi == lo) {
        out.push_back(1.0);
        continue;
      }
      const double v = (p.*field - lo) / (hi - lo);
      out.push_back(flip ? 1.0 - v : v);
    }
    return out;
  };
  const auto ndcg = normalize(&RadarPoint::ndcg, false);
  const auto delta = normalize(&RadarPoint::delta_ndcg, true);
  const auto aplt = normalize(&RadarPoint::aplt, false);
  std::vector<std::pair<std::string, RadarPoint>> out;
  for (std::size_t n = 0; n < values.size(); ++n) {
    out.emplace_back(values[n].first, RadarPoint{ndcg[n], delta[n], aplt[n]});
  }
  return out;
}

// fraction * 100 with two decimals, ties to even on the decimal expansion
// (the product is first printed at nine decimals to shed binary noise).
inline std::string FormatPercent(double fraction) {
  if (!std::isfinite(fraction)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", std::abs(fraction) * 100.0);
  std::string s(buf);
  const auto dot = s.find('.');
  std::string whole = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  std::string kept = frac.substr(0, 2);
  const std::string rest = frac.substr(2);
  bool round_up = false;
  if (rest[0] > '5') {
    round_up = true;
  } else if (rest[0] == '5') {
    const bool exact_half = rest.find_first_not_of('0', 1) == std::string::npos;
    round_up = !exact_half || ((kept[1] - '0') % 2 == 1);
  }
  std::string digits = whole + kept;
  if (round_up) {
    int pos = static_cast<int>(digits.size()) - 1;
    while (pos >= 0) {
      if (digits[static_cast<std::size_t>(pos)] == '9') {
        digits[static_cast<std::size_t>(pos)] = '0';
        --pos;
      } else {
        ++digits[static_cast<std::size_t>(pos)];
        break;
      }
    }
    if (pos < 0) digits.insert(digits.begin(), '1');
  }
  std::string out = digits.substr(0, digits.size() - 2) + "." + digits.substr(digits.size() - 2);
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  return (fraction < 0 && !zero ? "-" : "") + out;
}

enum class TableFormat { kCsv, kMarkdown };

// One row per (dataset, model) in first-seen order; several records for the
// same pair (multi-seed runs) are averaged. Rows without a test report
// print NA.
inline std::string EmitTable(const std::vector<RunRecord>& records,
                             TableFormat format = TableFormat::kCsv) {
  struct Row {
    std::string dataset, model;
    std::vector<const MetricReport*> reports;
  };
  std::vector<Row> rows;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& row) {
      return row.dataset == r.dataset && row.model == r.model;
    });
    if (it == rows.end()) {
      rows.push_back({r.dataset, r.model, {}});
      it = rows.end() - 1;
    }
    if (r.test) it->reports.push_back(&*r.test);
  }
  static constexpr const char* kHeader[] = {"Recall", "nDCG", "DeltaRecall", "DeltaNDCG", "APLT", "DeltaExp"};
  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    out << "dataset,model";
    for (const char* h : kHeader) out << ',' << h;
    out << '\n';
  } else {
    out << "| dataset | model |";
    for (const char* h : kHeader) out << ' ' << h << " |";
    out << "\n|---|---|";
    for (std::size_t n = 0; n < std::size(kHeader); ++n) out << "---:|";
    out << '\n';
  }
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    if (row.reports.empty()) {
      cells.assign(std::size(kHeader), "NA");
    } else {
      double sums[6] = {};
      for (const MetricReport* m : row.reports) {
        const double v[6] = {m->recall, m->ndcg, m->delta_recall, m->delta_ndcg, m->aplt, m->delta_exp};
        for (int c = 0; c < 6; ++c) sums[c] += v[c];
      }
      for (double s : sums) cells.push_back(FormatPercent(s / static_cast<double>(row.reports.size())));
    }
    if (format == TableFormat::kCsv) {
      out << row.dataset << ',' << row.model;
      for (const auto& c : cells) out << ',' << c;
    } else {
      out << "| " << row.dataset << " | " << row.model << " |";
      for (const auto& c : cells) out << ' ' << c << " |";
    }
    out << '\n';
  }
  return out.str();
}

inline std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct RadarGeometry {
  double cx = 200, cy = 210, radius = 150;

  // Axis a in {0: nDCG, 1: DeltaNDCG, 2: APLT}, 120 degrees apart, first axis up.
  std::pair<double, double> Vertex(int axis, double value) const {
    const double angle = -std::numbers::pi / 2 + axis * 2 * std::numbers::pi / 3;
    return {cx + radius * value * std::cos(angle), cy + radius * value * std::sin(angle)};
  }
};

// Kiviat chart of normalised triples: three axes, one closed polygon per
// model and a legend.
inline std::string EmitRadarSvg(const std::vector<std::pair<std::string, RadarPoint>>& normalized,
                                const std::string& title = "", const RadarGeometry& geo = {}) {
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  static constexpr const char* kAxes[] = {"nDCG", "\xCE\x94nDCG (flipped)", "APLT"};
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  const double height = std::max(420.0, 60.0 + 20.0 * static_cast<double>(normalized.size()));
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"" << height
      << "\" viewBox=\"0 0 560 " << height << "\">\n";
  if (!title.empty()) {
    out << "  <text x=\"" << geo.cx << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << XmlEscape(title) << "</text>\n";
  }
  out << "  <g class=\"grid\" stroke=\"#cccccc\" fill=\"none\">\n";
  for (int ring = 1; ring <= 4; ++ring) {
    out << "    <circle cx=\"" << geo.cx << "\" cy=\"" << geo.cy << "\" r=\""
        << geo.radius * ring / 4.0 << "\"/>\n";
  }
  for (int a = 0; a < 3; ++a) {
    const auto [x, y] = geo.Vertex(a, 1.0);
    out << "    <line x1=\"" << geo.cx << "\" y1=\"" << geo.cy << "\" x2=\"" << x << "\" y2=\"" << y
        << "\"/>\n";
  }
  out << "  </g>\n";
  for (int a = 0; a < 3; ++a) {
    const auto [x, y] = geo.Vertex(a, 1.12);
    out << "  <text class=\"axis\" x=\"" << x << "\" y=\"" << y
        << "\" text-anchor=\"middle\" font-size=\"12\">" << kAxes[a] << "</text>\n";
  }
  for (std::size_t n = 0; n < normalized.size(); ++n) {
    const auto& p = normalized[n].second;
    const double values[3] = {p.ndcg, p.delta_ndcg, p.aplt};
    const char* color = kColors[n % std::size(kColors)];
    out << "  <polygon class=\"model\" data-model=\"" << XmlEscape(normalized[n].first)
        << "\" points=\"";
    for (int a = 0; a < 3; ++a) {
      const auto [x, y] = geo.Vertex(a, std::clamp(values[a], 0.0, 1.0));
      out << (a ? " " : "") << x << ',' << y;
    }
    out << "\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
  }
  out << "  <g class=\"legend\" font-size=\"12\">\n";
  for (std::size_t n = 0; n < normalized.size(); ++n) {
    const double y = 50.0 + 20.0 * static_cast<double>(n);
    out << "    <rect x=\"410\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
        << kColors[n % std::size(kColors)] << "\"/>\n"
        << "    <text x=\"428\" y=\"" << y << "\">" << XmlEscape(normalized[n].first) << "</text>\n";
  }
  out << "  </g>\n</svg>\n";
  return out.str();
}

// Radar inputs for one dataset's records (test reports only).
inline std::vector<std::pair<std::string, RadarPoint>> RadarInputs(const std::vector<RunRecord>& records,
                                                                    const std::string& dataset) {
  std::vector<std::pair<std::string, RadarPoint>> out;
  for (const auto& r : records) {
    if (r.dataset != dataset || !r.test) continue;
    out.emplace_back(r.model, RadarPoint{r.test->ndcg, r.test->delta_ndcg, r.test->aplt});
  }
  return out;
}

}  // namespace fairdiff
