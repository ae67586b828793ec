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

#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "fairdiff/harness.hpp"
#include "test_util.hpp"

namespace fairdiff {
namespace {

using testing::TempDir;

// Scores every user with the same fixed vector.
class FixedScores final : public Recommender {
 public:
  explicit FixedScores(Vector s) : scores_(std::move(s)) {}
  std::string name() const override { return "fixed"; }
  std::size_t num_items() const override { return static_cast<std::size_t>(scores_.size()); }
  Vector ScoreUser(const Vector&, std::uint32_t) const override { return scores_; }
  void Save(const std::filesystem::path&) const override {}

 private:
  Vector scores_;
};

// Two users (M, F) over n items; train/validation/test given as item lists.
SplitDataset TinySplit(std::size_t n, std::vector<std::vector<std::uint32_t>> train,
                       std::vector<std::vector<std::uint32_t>> validation,
                       std::vector<std::vector<std::uint32_t>> test) {
  SplitDataset s;
  s.user_ids = {"m", "f"};
  s.user_groups = {Gender::kMale, Gender::kFemale};
  for (std::size_t i = 0; i < n; ++i) {
    s.item_ids.push_back(std::to_string(i));
    s.item_groups.push_back(i < 2 ? ItemGroup::kHead : ItemGroup::kTail);
  }
  auto events = [](const std::vector<std::vector<std::uint32_t>>& rows) {
    std::vector<std::vector<Event>> out(rows.size());
    for (std::size_t u = 0; u < rows.size(); ++u) {
      for (auto i : rows[u]) out[u].push_back({i, 0});
    }
    return out;
  };
  s.train = events(train);
  s.validation = events(validation);
  s.test = events(test);
  return s;
}

TEST(RecommendTopK, TopScoredItemComesFirst) {
  const auto s = TinySplit(6, {{0}, {1}}, {{}, {}}, {{2}, {3}});
  Vector scores(6);
  scores << 0.1, 0.2, 0.3, 0.4, 5.0, 0.6;
  const auto lists = RecommendTopK(FixedScores(scores), s, Phase::kTest, 3);
  for (const auto& l : lists.lists) EXPECT_EQ(l.front(), 4u);
}

TEST(RecommendTopK, OnlyUnmaskedItemsRemain) {
  // 6 items, user 0 has 0,1,2 in train and 3 in validation: at test only 4, 5 remain
  const auto s = TinySplit(6, {{0, 1, 2}, {0}}, {{3}, {1}}, {{4}, {5}});
  Vector scores(6);
  scores << 9, 8, 7, 6, 1, 2;
  bool short_lists = false;
  const auto lists = RecommendTopK(FixedScores(scores), s, Phase::kTest, 2, &short_lists);
  EXPECT_EQ(lists.lists[0], (std::vector<std::uint32_t>{5, 4}));
  EXPECT_FALSE(short_lists);
  // validation phase does not mask validation items
  const auto val = RecommendTopK(FixedScores(scores), s, Phase::kValidation, 2);
  EXPECT_EQ(val.lists[0], (std::vector<std::uint32_t>{3, 5}));
}

TEST(RecommendTopK, TiesGoToLowestIds) {
  const auto s = TinySplit(8, {{1, 4}, {0}}, {{6}, {}}, {{2}, {3}});
  const auto lists = RecommendTopK(FixedScores(Vector::Constant(8, 0.5)), s, Phase::kTest, 3);
  EXPECT_EQ(lists.lists[0], (std::vector<std::uint32_t>{0, 2, 3}));
  EXPECT_EQ(lists.lists[1], (std::vector<std::uint32_t>{1, 2, 3}));
}

TEST(RecommendTopK, ShortListsAreFlagged) {
  const auto s = TinySplit(4, {{0, 1}, {0}}, {{2}, {}}, {{3}, {1}});
  bool short_lists = false;
  const auto lists = RecommendTopK(FixedScores(Vector::Ones(4)), s, Phase::kTest, 3, &short_lists);
  EXPECT_TRUE(short_lists);
  EXPECT_EQ(lists.lists[0], (std::vector<std::uint32_t>{3}));
}

TEST(RecommendTopK, UsersWithoutTruthAreSkipped) {
  const auto s = TinySplit(4, {{0}, {0}}, {{1}, {}}, {{2}, {3}});
  const auto lists = RecommendTopK(FixedScores(Vector::Ones(4)), s, Phase::kValidation, 2);
  EXPECT_EQ(lists.users, (std::vector<std::uint32_t>{0}));
}

TEST(RecommendTopK, RealModelsNeverEmitMaskedItems) {
  const SplitDataset s = TemporalSplit(GenerateSynthetic({.n_users = 80, .n_items = 40, .density = 0.2}));
  for (const char* name : {"pop", "itemknn", "ease"}) {
    const auto model = FitModel(name, s.Rows(Phase::kTrain), s.num_items(), nullptr, 1);
    for (Phase phase : {Phase::kValidation, Phase::kTest}) {
      EXPECT_EQ(CountMaskViolations(RecommendTopK(*model, s, phase, 20), s, phase), 0u) << name;
    }
  }
}

TEST(Grid, CartesianProductInDeclarationOrder) {
  const auto grid = nlohmann::ordered_json::parse(R"({"b": [1, 2], "a": ["x", "y", "z"]})");
  const auto points = ExpandGrid(grid);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0].dump(), R"({"b":1,"a":"x"})");
  EXPECT_EQ(points[1].dump(), R"({"b":1,"a":"y"})");
  EXPECT_EQ(points[5].dump(), R"({"b":2,"a":"z"})");
  EXPECT_EQ(ExpandGrid(nlohmann::ordered_json::object()).size(), 1u);
  EXPECT_THROW(ExpandGrid(nlohmann::ordered_json::parse(R"({"a": []})")), ConfigError);
}

ExperimentConfig Config(const std::string& model, const std::string& grid) {
  return ExperimentConfig::FromJson(nlohmann::ordered_json::parse(
      R"({"dataset": {"kind": "synthetic", "name": "syn", "n_users": 120, "n_items": 60, "density": 0.15},
          "model": ")" + model + R"(", "grid": )" + grid + R"(, "seed": 42})"));
}

TEST(GridSearch, SingletonGridIsChosen) {
  const auto cfg = Config("ease", R"({"lambda": [50.0]})");
  const auto res = GridSearch(cfg, PrepareDataset(cfg.dataset));
  EXPECT_EQ(res.record.hyperparameters.dump(), R"({"lambda":50.0})");
  ASSERT_TRUE(res.record.test.has_value());
}

TEST(GridSearch, DominantPointWins) {
  const auto cfg = Config("itemknn", R"({"neighbors": [1, 100]})");
  const auto res = GridSearch(cfg, PrepareDataset(cfg.dataset));
  ASSERT_EQ(res.record.grid.size(), 2u);
  EXPECT_GT(*res.record.grid[1].validation_recall, *res.record.grid[0].validation_recall);
  EXPECT_EQ(res.record.hyperparameters.dump(), R"({"neighbors":100})");
  for (const auto& g : res.record.grid) EXPECT_LE(*g.validation_recall, res.record.validation_recall);
}

TEST(GridSearch, TiesKeepFirstPoint) {
  // any neighbour count above |I| gives the same model
  const auto cfg = Config("itemknn", R"({"neighbors": [500, 400]})");
  const auto res = GridSearch(cfg, PrepareDataset(cfg.dataset));
  EXPECT_EQ(*res.record.grid[0].validation_recall, *res.record.grid[1].validation_recall);
  EXPECT_EQ(res.record.hyperparameters.dump(), R"({"neighbors":500})");
}

TEST(GridSearch, FailedPointsAreSkippedAndAllFailingIsAnError) {
  const auto cfg = Config("ease", R"({"lambda": [-1.0, 10.0]})");
  const auto split = PrepareDataset(cfg.dataset);
  const auto res = GridSearch(cfg, split);
  EXPECT_FALSE(res.record.grid[0].validation_recall.has_value());
  EXPECT_FALSE(res.record.grid[0].error.empty());
  EXPECT_EQ(res.record.hyperparameters.dump(), R"({"lambda":10.0})");
  EXPECT_THROW(GridSearch(Config("ease", R"({"lambda": [-1.0, 0.0]})"), split), DataError);
}

TEST(GridSearch, DeterministicRerun) {
  const auto cfg = Config("bprmf", R"({"dim": [8], "epochs": [3], "lr": [0.01, 0.003]})");
  const auto split = PrepareDataset(cfg.dataset);
  auto a = GridSearch(cfg, split).record, b = GridSearch(cfg, split).record;
  a.wall_seconds = b.wall_seconds = 0;
  EXPECT_EQ(a, b);
}

TEST(Records, JsonLinesRoundTrip) {
  TempDir dir;
  const auto cfg = Config("ease", R"({"lambda": [-1.0, 10.0]})");
  auto rec = GridSearch(cfg, PrepareDataset(cfg.dataset)).record;
  rec.checkpoint = "x.ckpt";
  RunRecord failed;
  failed.model = "diffrec";
  failed.dataset = "syn";
  failed.error = "diverged";
  AppendRecord(rec, dir / "runs.jsonl");
  AppendRecord(failed, dir / "runs.jsonl");
  const auto back = LoadRecords(dir / "runs.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], rec);
  EXPECT_EQ(back[1], failed);
}

TEST(Config, SeedPrecedenceAndDefaultGrid) {
  const auto j = nlohmann::ordered_json::parse(R"({"dataset": {"kind": "synthetic"}, "model": "ease"})");
  ::unsetenv("FAIRDIFF_SEED");
  EXPECT_EQ(ExperimentConfig::FromJson(j).seed, 42u);
  ::setenv("FAIRDIFF_SEED", "7", 1);
  EXPECT_EQ(ExperimentConfig::FromJson(j).seed, 7u);
  auto with_seed = j;
  with_seed["seed"] = 3;
  EXPECT_EQ(ExperimentConfig::FromJson(with_seed).seed, 3u);
  ::unsetenv("FAIRDIFF_SEED");
  EXPECT_EQ(ExperimentConfig::FromJson(j).grid.dump(), R"({"lambda":[1.0,10.0,100.0,500.0]})");
  auto bad = j;
  bad["model"] = "neumf";
  EXPECT_THROW(ExperimentConfig::FromJson(bad), ConfigError);
}

TEST(Radar, MinMaxWithFlippedGap) {
  const auto out = NormalizeForRadar({{"a", {10, 1, 5}}, {"b", {12, 3, 5}}, {"c", {14, 2, 5}}});
  EXPECT_DOUBLE_EQ(out[0].second.ndcg, 0.0);
  EXPECT_DOUBLE_EQ(out[1].second.ndcg, 0.5);
  EXPECT_DOUBLE_EQ(out[2].second.ndcg, 1.0);
  EXPECT_DOUBLE_EQ(out[0].second.delta_ndcg, 1.0);
  EXPECT_DOUBLE_EQ(out[1].second.delta_ndcg, 0.0);
  EXPECT_DOUBLE_EQ(out[0].second.aplt, 1.0);  // zero range
  const auto single = NormalizeForRadar({{"only", {3, 4, 5}}});
  EXPECT_EQ(single[0].second.ndcg, 1.0);
  EXPECT_EQ(single[0].second.delta_ndcg, 1.0);
  EXPECT_EQ(single[0].second.aplt, 1.0);
}

TEST(Radar, BestAndWorstLandOnTheBounds) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<std::string, RadarPoint>> v;
    const std::size_t n = 2 + rng.Below(6);
    for (std::size_t m = 0; m < n; ++m) {
      v.push_back({std::to_string(m), {rng.Uniform(), rng.Uniform(), rng.Uniform()}});
    }
    const auto out = NormalizeForRadar(v);
    auto check = [&](double RadarPoint::*f, bool lower_is_better) {
      std::size_t best = 0, worst = 0;
      for (std::size_t m = 1; m < n; ++m) {
        const bool better = lower_is_better ? v[m].second.*f < v[best].second.*f : v[m].second.*f > v[best].second.*f;
        const bool worse = lower_is_better ? v[m].second.*f > v[worst].second.*f : v[m].second.*f < v[worst].second.*f;
        if (better) best = m;
        if (worse) worst = m;
      }
      EXPECT_EQ(out[best].second.*f, 1.0);
      EXPECT_EQ(out[worst].second.*f, 0.0);
      for (const auto& [name, p] : out) {
        EXPECT_GE(p.*f, 0.0);
        EXPECT_LE(p.*f, 1.0);
      }
    };
    check(&RadarPoint::ndcg, false);
    check(&RadarPoint::delta_ndcg, true);
    check(&RadarPoint::aplt, false);
  }
}

TEST(FormatPercent, TwoDecimalsHalfEven) {
  EXPECT_EQ(FormatPercent(0.1071), "10.71");
  EXPECT_EQ(FormatPercent(0.1319), "13.19");
  EXPECT_EQ(FormatPercent(0.12475), "12.48");
  EXPECT_EQ(FormatPercent(0.12485), "12.48");
  EXPECT_EQ(FormatPercent(0.124851), "12.49");
  EXPECT_EQ(FormatPercent(0.99995), "100.00");
  EXPECT_EQ(FormatPercent(0.0), "0.00");
  EXPECT_EQ(FormatPercent(std::nan("")), "NA");
}

TEST(Table, RowsAndNaCells) {
  RunRecord ok;
  ok.model = "diffrec";
  ok.dataset = "ml1m";
  ok.test = MetricReport{};
  ok.test->recall = 0.1071;
  ok.test->ndcg = 0.1319;
  ok.test->delta_recall = 0.0123;
  ok.test->delta_ndcg = 0.02;
  ok.test->aplt = 0.0618;
  ok.test->delta_exp = 0.5;
  RunRecord failed;
  failed.model = "ldiffrec";
  failed.dataset = "ml1m";
  const std::string csv = EmitTable({ok, failed});
  EXPECT_EQ(csv,
            "dataset,model,Recall,nDCG,DeltaRecall,DeltaNDCG,APLT,DeltaExp\n"
            "ml1m,diffrec,10.71,13.19,1.23,2.00,6.18,50.00\n"
            "ml1m,ldiffrec,NA,NA,NA,NA,NA,NA\n");
  const std::string md = EmitTable({ok}, TableFormat::kMarkdown);
  EXPECT_NE(md.find("| ml1m | diffrec | 10.71 | 13.19 |"), std::string::npos);
}

TEST(Table, SeedsOfOneRunAreAveraged) {
  RunRecord a, b;
  a.model = b.model = "ease";
  a.dataset = b.dataset = "d";
  a.test = MetricReport{};
  b.test = MetricReport{};
  a.test->recall = 0.10;
  b.test->recall = 0.20;
  EXPECT_NE(EmitTable({a, b}).find("d,ease,15.00,"), std::string::npos);
}

boost::property_tree::ptree ParseSvg(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

std::vector<std::pair<double, double>> PolygonPoints(const std::string& points) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(points);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

TEST(RadarSvg, WellFormedWithOnePolygonPerModel) {
  const auto svg = EmitRadarSvg({{"ones", {1, 1, 1}}, {"zeros", {0, 0, 0}}, {"<a&b>", {0.5, 0.2, 0.9}}}, "syn");
  const auto tree = ParseSvg(svg);
  const RadarGeometry geo;
  std::vector<std::string> labels;
  for (const auto& [tag, node] : tree.get_child("svg")) {
    if (tag != "polygon") continue;
    labels.push_back(node.get<std::string>("<xmlattr>.data-model"));
    const auto pts = PolygonPoints(node.get<std::string>("<xmlattr>.points"));
    ASSERT_EQ(pts.size(), 3u);
    for (const auto& [x, y] : pts) {
      const double r = std::hypot(x - geo.cx, y - geo.cy);
      if (labels.back() == "ones") {
        EXPECT_NEAR(r, geo.radius, 0.01);
      }
      if (labels.back() == "zeros") {
        EXPECT_NEAR(r, 0.0, 0.01);
      }
    }
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"ones", "zeros", "<a&b>"}));
}

}  // namespace
}  // namespace fairdiff
