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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairdiff/errors.hpp"
#include "fairdiff/nncore.hpp"

namespace fairdiff {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as little-endian doubles");

// Binary container: 8-byte magic, u64 header length, JSON header, u64 count,
// then `count` little-endian doubles. Networks live in the blob; the header
// records their layout and any model metadata.
struct Checkpoint {
  static constexpr char kMagic[9] = "FDCKPT01";

  nlohmann::json header = nlohmann::json::object();
  std::vector<double> blob;

  std::size_t AppendBlock(const double* data, std::size_t n) {
    const std::size_t offset = blob.size();
    blob.insert(blob.end(), data, data + n);
    return offset;
  }

  void PutMatrix(const std::string& name, const Matrix& m) {
    const auto offset = AppendBlock(m.data(), static_cast<std::size_t>(m.size()));
    header["matrices"][name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}};
  }

  Matrix GetMatrix(const std::string& name) const {
    const auto& meta = header.at("matrices").at(name);
    Matrix m(meta.at("rows").get<Eigen::Index>(), meta.at("cols").get<Eigen::Index>());
    CopyOut(meta.at("offset").get<std::size_t>(), m.data(), static_cast<std::size_t>(m.size()));
    return m;
  }

  void PutMlp(const std::string& name, const Mlp& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const auto& layer = net.layer(l);
      const auto w = AppendBlock(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
      const auto b = AppendBlock(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
      layers.push_back({{"in", layer.weight.rows()},
                        {"out", layer.weight.cols()},
                        {"activation", ActivationName(layer.activation)},
                        {"weight_offset", w},
                        {"bias_offset", b}});
    }
    header["mlps"][name] = layers;
  }

  Mlp GetMlp(const std::string& name) const {
    std::vector<DenseLayer> layers;
    for (const auto& meta : header.at("mlps").at(name)) {
      DenseLayer layer;
      const auto in = meta.at("in").get<Eigen::Index>();
      const auto out = meta.at("out").get<Eigen::Index>();
      layer.weight.resize(in, out);
      layer.bias.resize(1, out);
      layer.activation = ActivationFromName(meta.at("activation").get<std::string>());
      CopyOut(meta.at("weight_offset").get<std::size_t>(), layer.weight.data(),
              static_cast<std::size_t>(layer.weight.size()));
      CopyOut(meta.at("bias_offset").get<std::size_t>(), layer.bias.data(),
              static_cast<std::size_t>(layer.bias.size()));
      layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
  }

  void Save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    const std::string text = header.dump();
    const std::uint64_t header_len = text.size();
    const std::uint64_t count = blob.size();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(double)));
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }

  static bool Sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[8] = {};
    in.read(magic, 8);
    return in && std::memcmp(magic, kMagic, 8) == 0;
  }

  static Checkpoint Load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[8] = {};
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
      throw DataError(path.string() + " is not a checkpoint container");
    }
    std::uint64_t header_len = 0, count = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
    std::string text(header_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_len));
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    Checkpoint ck;
    ck.header = nlohmann::json::parse(text);
    ck.blob.resize(count);
    in.read(reinterpret_cast<char*>(ck.blob.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint " + path.string());
    return ck;
  }

 private:
  void CopyOut(std::size_t offset, double* dst, std::size_t n) const {
    if (offset + n > blob.size()) throw DataError("checkpoint block out of range");
    std::memcpy(dst, blob.data() + offset, n * sizeof(double));
  }
};

}  // namespace fairdiff
