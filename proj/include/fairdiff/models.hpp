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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairdiff/baselines/bprmf.hpp"
#include "fairdiff/baselines/ease.hpp"
#include "fairdiff/baselines/itemknn.hpp"
#include "fairdiff/baselines/multivae.hpp"
#include "fairdiff/checkpoint.hpp"
#include "fairdiff/diffusion.hpp"
#include "fairdiff/errors.hpp"
#include "fairdiff/ldiffrec.hpp"
#include "fairdiff/recommender.hpp"

namespace fairdiff {

inline constexpr std::array<std::string_view, 7> kModelNames = {
    "pop", "itemknn", "ease", "bprmf", "multivae", "diffrec", "ldiffrec"};

inline bool IsKnownModel(std::string_view name) {
  for (auto m : kModelNames) {
    if (m == name) return true;
  }
  return false;
}

namespace detail {

template <typename T>
void Read(const nlohmann::json& hp, const char* key, T& out) {
  if (hp.contains(key)) out = hp.at(key).get<T>();
}

// T' may be given as an integer or as "half" (T / 2, rounded down).
inline int ReadInferenceSteps(const nlohmann::json& hp, int steps, int fallback) {
  if (!hp.contains("inference_steps")) return fallback;
  const auto& v = hp.at("inference_steps");
  if (v.is_string()) {
    if (v.get<std::string>() != "half") throw ConfigError("inference_steps must be an integer or \"half\"");
    return steps / 2;
  }
  return v.get<int>();
}

inline void RejectUnknown(const nlohmann::json& hp, std::initializer_list<const char*> allowed,
                          std::string_view model) {
  for (const auto& [key, value] : hp.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown hyperparameter '" + key + "' for " + std::string(model));
  }
}

}  // namespace detail

inline BprMfParams BprMfParamsFrom(const nlohmann::json& hp) {
  detail::RejectUnknown(hp, {"dim", "lr", "reg", "epochs", "batch", "init_std"}, "bprmf");
  BprMfParams p;
  detail::Read(hp, "dim", p.dim);
  detail::Read(hp, "lr", p.lr);
  detail::Read(hp, "reg", p.reg);
  detail::Read(hp, "epochs", p.epochs);
  detail::Read(hp, "batch", p.batch);
  detail::Read(hp, "init_std", p.init_std);
  return p;
}

inline MultiVaeParams MultiVaeParamsFrom(const nlohmann::json& hp) {
  detail::RejectUnknown(hp, {"latent_dim", "hidden", "dropout", "beta_max", "anneal_steps", "lr",
                             "epochs", "batch"}, "multivae");
  MultiVaeParams p;
  detail::Read(hp, "latent_dim", p.latent_dim);
  detail::Read(hp, "hidden", p.hidden);
  detail::Read(hp, "dropout", p.dropout);
  detail::Read(hp, "beta_max", p.beta_max);
  detail::Read(hp, "anneal_steps", p.anneal_steps);
  detail::Read(hp, "lr", p.lr);
  detail::Read(hp, "epochs", p.epochs);
  detail::Read(hp, "batch", p.batch);
  return p;
}

inline DiffRecParams DiffRecParamsFrom(const nlohmann::json& hp) {
  detail::RejectUnknown(hp, {"steps", "noise_scale", "beta_min", "beta_max", "inference_steps",
                             "hidden", "emb_dim", "lr", "weight_decay", "epochs", "batch"},
                        "diffrec");
  DiffRecParams p;
  detail::Read(hp, "steps", p.steps);
  detail::Read(hp, "noise_scale", p.noise_scale);
  detail::Read(hp, "beta_min", p.beta_min);
  detail::Read(hp, "beta_max", p.beta_max);
  p.inference_steps = detail::ReadInferenceSteps(hp, p.steps, p.inference_steps);
  detail::Read(hp, "hidden", p.hidden);
  detail::Read(hp, "emb_dim", p.emb_dim);
  detail::Read(hp, "lr", p.lr);
  detail::Read(hp, "weight_decay", p.weight_decay);
  detail::Read(hp, "epochs", p.epochs);
  detail::Read(hp, "batch", p.batch);
  return p;
}

inline LDiffRecParams LDiffRecParamsFrom(const nlohmann::json& hp) {
  detail::RejectUnknown(hp, {"clusters", "compression", "steps", "noise_scale", "beta_min",
                             "beta_max", "inference_steps", "hidden", "emb_dim", "gamma",
                             "beta_kl", "lr", "epochs", "batch", "embedding_dim",
                             "embedding_epochs"}, "ldiffrec");
  LDiffRecParams p;
  detail::Read(hp, "clusters", p.clusters);
  detail::Read(hp, "compression", p.compression);
  detail::Read(hp, "steps", p.steps);
  detail::Read(hp, "noise_scale", p.noise_scale);
  detail::Read(hp, "beta_min", p.beta_min);
  detail::Read(hp, "beta_max", p.beta_max);
  p.inference_steps = detail::ReadInferenceSteps(hp, p.steps, p.inference_steps);
  detail::Read(hp, "hidden", p.hidden);
  detail::Read(hp, "emb_dim", p.emb_dim);
  detail::Read(hp, "gamma", p.gamma);
  detail::Read(hp, "beta_kl", p.beta_kl);
  detail::Read(hp, "lr", p.lr);
  detail::Read(hp, "epochs", p.epochs);
  detail::Read(hp, "batch", p.batch);
  detail::Read(hp, "embedding_dim", p.embedding_dim);
  detail::Read(hp, "embedding_epochs", p.embedding_epochs);
  return p;
}

// Grid searched when a config names no grid.
inline nlohmann::ordered_json DefaultGrid(std::string_view model) {
  using J = nlohmann::ordered_json;
  if (model == "itemknn") return J{{"neighbors", {50, 100, 300}}};
  if (model == "ease") return J{{"lambda", {1.0, 10.0, 100.0, 500.0}}};
  if (model == "bprmf") return J{{"dim", {64}}, {"lr", {1e-3, 3e-3}}, {"reg", {1e-4, 1e-3}}};
  if (model == "multivae") return J{{"latent_dim", {64, 200}}, {"beta_max", {0.2, 0.5}}};
  if (model == "diffrec") {
    return J{{"steps", {5, 20, 50}}, {"noise_scale", {0.01, 0.1, 0.5}}, {"inference_steps", {J(0), J("half")}}};
  }
  if (model == "ldiffrec") return J{{"clusters", {2, 5, 10}}, {"compression", {0.05, 0.1, 0.3}}};
  return J::object();
}

// Trains `model` on the train rows with hyperparameters from a JSON object.
inline std::unique_ptr<Recommender> FitModel(std::string_view model, const ItemRows& train,
                                             std::size_t num_items, const nlohmann::json& hp,
                                             std::uint64_t seed) {
  const nlohmann::json params = hp.is_null() ? nlohmann::json::object() : hp;
  if (model == "pop") {
    detail::RejectUnknown(params, {}, model);
    return std::make_unique<PopularityModel>(FitPopularity(train, num_items));
  }
  if (model == "itemknn") {
    detail::RejectUnknown(params, {"neighbors"}, model);
    return std::make_unique<ItemKnnModel>(
        FitItemKnn(train, num_items, params.value("neighbors", std::size_t{100})));
  }
  if (model == "ease") {
    detail::RejectUnknown(params, {"lambda"}, model);
    return std::make_unique<EaseModel>(FitEase(train, num_items, params.value("lambda", 100.0)));
  }
  if (model == "bprmf") {
    return std::make_unique<BprMfModel>(FitBprMf(train, num_items, BprMfParamsFrom(params), seed));
  }
  if (model == "multivae") {
    return std::make_unique<MultiVaeModel>(
        FitMultiVae(train, num_items, MultiVaeParamsFrom(params), seed));
  }
  if (model == "diffrec") {
    return std::make_unique<DiffRecModel>(FitDiffRec(train, num_items, DiffRecParamsFrom(params), seed));
  }
  if (model == "ldiffrec") {
    return std::make_unique<LDiffRecModel>(
        FitLDiffRec(train, num_items, LDiffRecParamsFrom(params), seed));
  }
  throw ConfigError("unknown model '" + std::string(model) + "'");
}

inline std::unique_ptr<Recommender> LoadModel(const std::filesystem::path& path) {
  if (ItemKnnModel::Sniff(path)) return std::make_unique<ItemKnnModel>(ItemKnnModel::Load(path));
  if (!Checkpoint::Sniff(path)) {
    std::ifstream in(path);
    std::string hash, tag;
    std::size_t n = 0;
    if (in >> hash >> tag >> n && tag == "pop") {
      Vector counts(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) in >> counts[static_cast<Eigen::Index>(i)];
      return std::make_unique<PopularityModel>(std::move(counts));
    }
    throw DataError(path.string() + " is not a recognised model checkpoint");
  }
  const Checkpoint ck = Checkpoint::Load(path);
  const auto model = ck.header.at("model").get<std::string>();
  if (model == "ease") return std::make_unique<EaseModel>(EaseModel::FromCheckpoint(ck));
  if (model == "bprmf") return std::make_unique<BprMfModel>(BprMfModel::FromCheckpoint(ck));
  if (model == "multivae") return std::make_unique<MultiVaeModel>(MultiVaeModel::FromCheckpoint(ck));
  if (model == "diffrec") return std::make_unique<DiffRecModel>(DiffRecModel::FromCheckpoint(ck));
  if (model == "ldiffrec") return std::make_unique<LDiffRecModel>(LDiffRecModel::FromCheckpoint(ck));
  throw DataError("checkpoint holds unknown model '" + model + "'");
}

}  // namespace fairdiff
