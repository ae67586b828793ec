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

// fairdiff: prepare datasets, run sweeps, evaluate checkpoints and render
// result tables and radar charts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "fairdiff/dataset.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/harness.hpp"
#include "fairdiff/metrics.hpp"
#include "fairdiff/models.hpp"

namespace fs = std::filesystem;
using namespace fairdiff;

namespace {

nlohmann::ordered_json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

int Prepare(const std::string& kind, const fs::path& in, const fs::path& out, std::size_t min_inter) {
  Dataset d;
  if (kind == "ml1m") {
    d = IngestMl1m(in / "ratings.dat", in / "users.dat");
  } else if (kind == "canonical") {
    d = IngestCanonical(in / "interactions.tsv", in / "users.tsv");
  } else {
    d = GenerateSynthetic(in.empty() ? SyntheticConfig{} : SyntheticConfigFrom(nlohmann::json::parse(ReadJsonFile(in).dump())));
  }
  const DatasetStats raw = ComputeStats(d);
  d = FilterMinInteractions(d, min_inter);
  const DatasetStats st = ComputeStats(d);
  SplitDataset split = TemporalSplit(d);
  SaveSplit(split, out);
  std::printf("raw: %zu users, %zu items, %zu interactions\n", raw.users, raw.items, raw.interactions);
  std::printf("kept: %zu users, %zu items, %zu interactions, sparsity %.4f%%, male %.1f%%\n", st.users,
              st.items, st.interactions, 100.0 * st.sparsity, 100.0 * st.male_share);
  std::printf("split: train %zu, validation %zu, test %zu -> %s\n", split.Count(Phase::kTrain),
              split.Count(Phase::kValidation), split.Count(Phase::kTest), out.string().c_str());
  return 0;
}

int Sweep(const fs::path& config_path) {
  const ExperimentConfig base = ExperimentConfig::FromJson(ReadJsonFile(config_path));
  const SplitDataset split = PrepareDataset(base.dataset);
  std::vector<std::uint64_t> seeds = base.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : base.seeds;
  const fs::path records = base.output_dir / "runs.jsonl";
  fs::create_directories(base.output_dir);
  for (auto seed : seeds) {
    ExperimentConfig cfg = base;
    cfg.seed = seed;
    GridSearchResult res = GridSearch(cfg, split);
    const fs::path ckpt = base.output_dir / (cfg.dataset_name + "_" + cfg.model + "_s" + std::to_string(seed) + ".ckpt");
    res.model->Save(ckpt);
    res.record.checkpoint = ckpt.string();
    AppendRecord(res.record, records);
    const MetricReport& m = *res.record.test;
    std::printf("%s %s seed=%llu hp=%s val_recall=%.4f | test recall=%s ndcg=%s dR=%s dN=%s aplt=%s dExp=%s (%.1fs)%s\n",
                cfg.dataset_name.c_str(), cfg.model.c_str(), static_cast<unsigned long long>(seed),
                res.record.hyperparameters.dump().c_str(), res.record.validation_recall,
                FormatPercent(m.recall).c_str(), FormatPercent(m.ndcg).c_str(),
                FormatPercent(m.delta_recall).c_str(), FormatPercent(m.delta_ndcg).c_str(),
                FormatPercent(m.aplt).c_str(), FormatPercent(m.delta_exp).c_str(), res.record.wall_seconds,
                res.record.short_lists ? " [short lists]" : "");
  }
  std::printf("records appended to %s\n", records.string().c_str());
  return 0;
}

int Evaluate(const fs::path& checkpoint, const fs::path& split_dir, std::size_t k, const std::string& phase_name) {
  const SplitDataset split = LoadSplit(split_dir);
  auto model = LoadModel(checkpoint);
  if (model->num_items() != split.num_items()) {
    throw DimensionError("checkpoint scores " + std::to_string(model->num_items()) + " items but split has " +
                         std::to_string(split.num_items()));
  }
  const Phase phase = phase_name == "validation" ? Phase::kValidation : Phase::kTest;
  bool short_lists = false;
  const MetricReport report = EvaluateModel(*model, split, phase, k, &short_lists);
  nlohmann::json j = report;
  j.erase("user_recall");
  j.erase("user_ndcg");
  j["model"] = model->name();
  j["short_lists"] = short_lists;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int Report(const fs::path& records, const std::string& format) {
  std::cout << EmitTable(LoadRecords(records), format == "md" ? TableFormat::kMarkdown : TableFormat::kCsv);
  return 0;
}

int Radar(const fs::path& records_path, const fs::path& out, std::string dataset) {
  const auto records = LoadRecords(records_path);
  if (dataset.empty()) {
    for (const auto& r : records) {
      if (r.test) {
        dataset = r.dataset;
        break;
      }
    }
  }
  const auto inputs = RadarInputs(records, dataset);
  if (inputs.empty()) throw DataError("no evaluated records for dataset '" + dataset + "'");
  WriteText(out, EmitRadarSvg(NormalizeForRadar(inputs), dataset));
  std::printf("%zu models -> %s\n", inputs.size(), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion recommender fairness benchmark"};
  app.require_subcommand(1);

  std::string kind, phase = "test", format = "csv", dataset;
  fs::path in, out, config, checkpoint, split_dir, records;
  std::size_t min_inter = 20, k = 20;

  auto* prepare = app.add_subcommand("prepare", "ingest, filter and split a dataset");
  prepare->add_option("--dataset", kind)->required()->check(CLI::IsMember({"ml1m", "canonical", "synthetic"}));
  prepare->add_option("--in", in, "input directory (or synthetic JSON config)");
  prepare->add_option("--out", out, "output split directory")->required();
  prepare->add_option("--min-interactions", min_inter);

  auto* sweep = app.add_subcommand("sweep", "grid search one model on one dataset");
  sweep->add_option("--config", config)->required()->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a prepared split");
  evaluate->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", split_dir)->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--k", k);
  evaluate->add_option("--phase", phase)->check(CLI::IsMember({"validation", "test"}));

  auto* report = app.add_subcommand("report", "results table from run records");
  report->add_option("--records", records)->required()->check(CLI::ExistingFile);
  report->add_option("--format", format)->check(CLI::IsMember({"csv", "md"}));

  auto* radar = app.add_subcommand("radar", "trade-off radar chart from run records");
  radar->add_option("--records", records)->required()->check(CLI::ExistingFile);
  radar->add_option("--out", out)->required();
  radar->add_option("--dataset", dataset);

  CLI11_PARSE(app, argc, argv);
  try {
    if (prepare->parsed()) {
      if (kind != "synthetic" && in.empty()) throw ConfigError("--in is required for " + kind);
      return Prepare(kind, in, out, min_inter);
    }
    if (sweep->parsed()) return Sweep(config);
    if (evaluate->parsed()) return Evaluate(checkpoint, split_dir, k, phase);
    if (report->parsed()) return Report(records, format);
    if (radar->parsed()) return Radar(records, out, dataset);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
