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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fairdiff/errors.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff {

// Batches are rows: a (batch x features) matrix multiplies (in x out) weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation : std::uint8_t { kIdentity, kTanh, kRelu };

inline std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    default: return "identity";
  }
}

inline Activation ActivationFromName(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
  Activation activation = Activation::kIdentity;
};

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Matrix> bias;

  void SetZero() {
    for (auto& w : weight) w.setZero();
    for (auto& b : bias) b.setZero();
  }
};

class Mlp {
 public:
  // Per-layer inputs and pre-activations of one forward pass.
  struct Cache {
    const Mlp* owner = nullptr;
    std::uint64_t generation = 0;
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
  };

  Mlp() = default;

  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 1; l < layers_.size(); ++l) {
      if (layers_[l].weight.rows() != layers_[l - 1].weight.cols()) {
        throw DimensionError("Mlp layer " + std::to_string(l) + " does not chain");
      }
    }
    for (const auto& layer : layers_) {
      if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
        throw DimensionError("Mlp bias shape does not match weight");
      }
    }
  }

  // Xavier-uniform weights, zero biases. dims = {in, hidden..., out}.
  Mlp(std::span<const int> dims, Activation hidden, Activation output, Rng& rng) {
    if (dims.size() < 2) throw ConfigError("Mlp needs at least input and output dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const int in = dims[l], out = dims[l + 1];
      if (in < 1 || out < 1) throw ConfigError("Mlp dims must be positive");
      DenseLayer layer;
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      layer.weight.resize(in, out);
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
        layer.weight.data()[i] = (2.0 * rng.Uniform() - 1.0) * limit;
      }
      layer.bias = Matrix::Zero(1, out);
      layer.activation = l + 2 == dims.size() ? output : hidden;
      layers_.push_back(std::move(layer));
    }
  }

  Mlp(std::initializer_list<int> dims, Activation hidden, Activation output, Rng& rng)
      : Mlp(std::vector<int>(dims), hidden, output, rng) {}
  Mlp(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng)
      : Mlp(std::span<const int>(dims), hidden, output, rng) {}

  Mlp(const Mlp& other) : layers_(other.layers_) {}
  Mlp& operator=(const Mlp& other) {
    layers_ = other.layers_;
    ++generation_;
    return *this;
  }
  Mlp(Mlp&&) = default;
  Mlp& operator=(Mlp&&) = default;

  int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.rows()); }
  int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.cols()); }
  std::size_t num_layers() const { return layers_.size(); }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
  }

  std::vector<int> dims() const {
    std::vector<int> d;
    if (layers_.empty()) return d;
    d.push_back(input_dim());
    for (const auto& layer : layers_) d.push_back(static_cast<int>(layer.weight.cols()));
    return d;
  }

  // Mutable access invalidates outstanding caches.
  std::vector<Matrix*> parameters() {
    ++generation_;
    std::vector<Matrix*> out;
    for (auto& layer : layers_) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
    return out;
  }

  std::vector<const Matrix*> parameters() const {
    std::vector<const Matrix*> out;
    for (const auto& layer : layers_) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
    return out;
  }

  MlpGradients ZeroGradients() const {
    MlpGradients g;
    for (const auto& layer : layers_) {
      g.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
      g.bias.push_back(Matrix::Zero(1, layer.bias.cols()));
    }
    return g;
  }

  Matrix Forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.cols() != input_dim()) {
      throw DimensionError("Mlp input has " + std::to_string(x.cols()) + " columns, expected " +
                           std::to_string(input_dim()));
    }
    if (cache != nullptr) {
      cache->owner = this;
      cache->generation = generation_;
      cache->inputs.clear();
      cache->pre.clear();
    }
    Matrix h = x;
    for (const auto& layer : layers_) {
      Matrix z = h * layer.weight;
      z.rowwise() += layer.bias.row(0);
      if (cache != nullptr) {
        cache->inputs.push_back(std::move(h));
        cache->pre.push_back(z);
      }
      h = Apply(layer.activation, std::move(z));
    }
    return h;
  }

  Vector Forward(const Vector& x) const {
    Matrix row = x.transpose();
    return Forward(row).row(0).transpose();
  }

  // Accumulates parameter gradients into grads and returns d(loss)/d(input).
  Matrix Backward(const Cache& cache, const Matrix& d_output, MlpGradients& grads) const {
    if (cache.owner != this || cache.generation != generation_ ||
        cache.inputs.size() != layers_.size()) {
      throw DimensionError("Mlp backward called with a stale or foreign cache");
    }
    if (d_output.cols() != output_dim() || d_output.rows() != cache.pre.back().rows()) {
      throw DimensionError("Mlp backward: d_output shape mismatch");
    }
    if (grads.weight.size() != layers_.size()) grads = ZeroGradients();
    Matrix delta = d_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& layer = layers_[l];
      ApplyDerivative(layer.activation, cache.pre[l], delta);
      grads.weight[l].noalias() += cache.inputs[l].transpose() * delta;
      grads.bias[l] += delta.colwise().sum();
      Matrix next = delta * layer.weight.transpose();
      delta = std::move(next);
    }
    return delta;
  }

  std::vector<const Matrix*> GradientRefs(const MlpGradients& g) const {
    std::vector<const Matrix*> out;
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
      out.push_back(&g.weight[l]);
      out.push_back(&g.bias[l]);
    }
    return out;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
      const auto &x = a.layers_[l], &y = b.layers_[l];
      if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
          x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias) {
        return false;
      }
    }
    return true;
  }

 private:
  static Matrix Apply(Activation a, Matrix z) {
    switch (a) {
      case Activation::kTanh: return z.array().tanh().matrix();
      case Activation::kRelu: return z.cwiseMax(0.0);
      default: return z;
    }
  }

  // delta <- delta * f'(pre)
  static void ApplyDerivative(Activation a, const Matrix& pre, Matrix& delta) {
    switch (a) {
      case Activation::kTanh:
        delta.array() *= 1.0 - pre.array().tanh().square();
        break;
      case Activation::kRelu:
        delta.array() *= (pre.array() > 0.0).cast<double>();
        break;
      default:
        break;
    }
  }

  std::vector<DenseLayer> layers_;
  std::uint64_t generation_ = 0;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  AdamOptions options;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t step = 0;
};

// Bias-corrected Adam. Moments are created lazily on the first call.
inline void AdamUpdate(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
                       AdamState& state) {
  if (params.size() != grads.size()) throw DimensionError("Adam: params/grads count mismatch");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("Adam: state does not match params");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k]->rows() != params[k]->rows() || grads[k]->cols() != params[k]->cols()) {
      throw DimensionError("Adam: gradient " + std::to_string(k) + " shape mismatch");
    }
    if (!grads[k]->allFinite()) {
      throw DivergenceError("Adam: non-finite gradient in parameter block " + std::to_string(k));
    }
  }
  const auto& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g = *grads[k];
    state.m[k] = o.beta1 * state.m[k] + (1.0 - o.beta1) * g;
    state.v[k] = o.beta2 * state.v[k] + (1.0 - o.beta2) * g.cwiseAbs2();
    p.array() -= o.lr * (state.m[k].array() / c1) / ((state.v[k].array() / c2).sqrt() + o.eps);
    if (o.weight_decay > 0) p *= 1.0 - o.lr * o.weight_decay;
  }
}

inline std::size_t TotalSize(std::span<const Matrix* const> blocks) {
  std::size_t n = 0;
  for (const Matrix* b : blocks) n += b->size();
  return n;
}

inline Vector Flatten(std::span<const Matrix* const> blocks) {
  Vector out(static_cast<Eigen::Index>(TotalSize(blocks)));
  Eigen::Index offset = 0;
  for (const Matrix* b : blocks) {
    out.segment(offset, b->size()) = Eigen::Map<const Vector>(b->data(), b->size());
    offset += b->size();
  }
  return out;
}

inline void Unflatten(const Vector& flat, std::span<Matrix* const> blocks) {
  std::size_t n = 0;
  for (Matrix* b : blocks) n += b->size();
  if (static_cast<std::size_t>(flat.size()) != n) throw DimensionError("Unflatten: size mismatch");
  Eigen::Index offset = 0;
  for (Matrix* b : blocks) {
    Eigen::Map<Vector>(b->data(), b->size()) = flat.segment(offset, b->size());
    offset += b->size();
  }
}

struct GradCheckOptions {
  double step = 1e-5;
  // 0 checks every coordinate; otherwise at least this many sampled ones.
  std::size_t max_coords = 0;
  // Denominator floor for the relative error, guarding near-zero gradients.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

// Loss that optionally writes its analytic gradient.
using LossFn = std::function<double(const Vector& params, Vector* grad)>;

// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over the
// checked coordinates, numeric being a central difference.
inline double GradCheck(const LossFn& loss, const Vector& params, const GradCheckOptions& opts = {}) {
  Vector analytic(params.size());
  loss(params, &analytic);
  std::vector<Eigen::Index> coords(static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) coords[static_cast<std::size_t>(i)] = i;
  if (opts.max_coords > 0 && coords.size() > opts.max_coords) {
    Rng rng(opts.seed);
    rng.Shuffle(coords);
    coords.resize(std::max<std::size_t>(opts.max_coords, 200));
  }
  double worst = 0.0;
  Vector p = params;
  for (Eigen::Index i : coords) {
    const double saved = p[i];
    p[i] = saved + opts.step;
    const double up = loss(p, nullptr);
    p[i] = saved - opts.step;
    const double down = loss(p, nullptr);
    p[i] = saved;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), opts.floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

// Collects parameter pointers of several networks into one list.
inline std::vector<Matrix*> ConcatParams(std::initializer_list<Mlp*> nets) {
  std::vector<Matrix*> out;
  for (Mlp* n : nets) {
    auto p = n->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

inline double LogSumExp(const Eigen::Ref<const RowVector>& row) {
  const double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

// Row-wise log-softmax.
inline Matrix LogSoftmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.row(r) = logits.row(r).array() - LogSumExp(logits.row(r));
  }
  return out;
}

}  // namespace fairdiff
