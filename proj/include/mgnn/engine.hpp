// Copyright 2026 The mgnn Authors.
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

#ifndef MGNN_ENGINE_HPP
#define MGNN_ENGINE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mgnn/coarsening.hpp"
#include "mgnn/graph.hpp"

namespace mgnn {

/// Accumulates the multiply count of layer products, using the same cost
/// model as gcn_layer_flops.
struct FlopCounter {
  std::uint64_t total = 0;
  void add(std::uint64_t flops) { total += flops; }
};

/// Sparse operator with values, stored in CSR. Both operators built here are
/// symmetric, so applying the transpose is the same as applying the operator.
class Propagator {
 public:
  /// Raw binary adjacency A.
  static Propagator adjacency(const SparseGraph& g);
  /// D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I.
  static Propagator normalized(const SparseGraph& g);

  Matrix apply(const Matrix& x) const;
  Index num_nodes() const { return offsets_.size() - 1; }

 private:
  std::vector<Index> offsets_;
  std::vector<Index> cols_;
  std::vector<double> values_;
};

enum class LayerKind { GCN, GIN };

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

/// One message-passing layer.
///   GCN: Z = (P X) W + b, with P the (optionally normalized) adjacency.
///   GIN: Z = relu(((1 + eps) X + A X) W + b) W2 + b2.
struct Layer {
  LayerKind kind = LayerKind::GCN;
  Index c_in = 0;
  Index c_out = 0;
  Matrix weight;   // c_in x c_out
  Matrix bias;     // 1 x c_out, or empty
  Matrix weight2;  // GIN only, c_out x c_out
  Matrix bias2;    // GIN only, 1 x c_out
  double gin_eps = 0.0;
};

struct ModelSpec {
  LayerKind kind = LayerKind::GCN;
  /// Channel widths, input first and class count last; layers = size - 1.
  std::vector<Index> channels;
  bool normalize_adjacency = true;
  bool bias = true;
  double gin_eps = 0.0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Layer stack with ReLU between layers and a linear last layer. Weight
/// shapes depend only on channel widths, never on the graph.
struct Model {
  std::vector<Layer> layers;
  bool normalize_adjacency = true;

  /// Glorot-uniform weights, zero biases.
  static Model create(const ModelSpec& spec, Rng& rng);

  Index input_channels() const { return layers.front().c_in; }
  Index output_channels() const { return layers.back().c_out; }

  /// Parameter tensors in a fixed order: per layer weight, bias, weight2, bias2
  /// (absent ones skipped).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
};

/// Same shapes and order as Model::parameters().
struct Gradients {
  std::vector<Matrix> tensors;

  static Gradients zeros_like(const Model& model);
  /// this += scale * other
  void add_scaled(const Gradients& other, double scale);
  double max_abs() const;
};

/// Operators a model needs on one graph; build once per level.
struct GraphOperators {
  std::shared_ptr<const Propagator> gcn;  // P used by GCN layers
  std::shared_ptr<const Propagator> sum;  // raw A used by GIN layers
  Index num_nodes = 0;
  Index undirected_edges = 0;

  static GraphOperators prepare(const Model& model, const SparseGraph& g);
};

/// Intermediates kept by forward() for backward().
struct Tape {
  struct LayerCache {
    Matrix input;       // H
    Matrix aggregated;  // P H (GCN) or (1 + eps) H + A H (GIN)
    Matrix pre1;        // GIN first linear output
    Matrix hidden;      // GIN relu(pre1)
    Matrix pre;         // layer output before activation
    bool activated = false;
  };
  GraphOperators ops;
  std::vector<LayerCache> layers;
  std::vector<std::pair<Index, Index>> shapes;  // (c_in, c_out) per layer
};

struct ForwardResult {
  Matrix logits;
  Tape tape;
};

/// FLOPs of one forward pass of `layer` on a graph; GCN layers match
/// gcn_layer_flops, GIN layers add the second linear map.
std::uint64_t layer_flops(const Layer& layer, Index num_nodes, Index undirected_edges);

ForwardResult forward(const Model& model, const GraphOperators& ops, const Matrix& x, FlopCounter* counter = nullptr);
ForwardResult forward(const Model& model, const SparseGraph& g, const Matrix& x, FlopCounter* counter = nullptr);

/// Scalar loss value and its gradient with respect to the logits.
struct LossHead {
  double value = 0.0;
  Matrix d_logits;
};

/// Mean of -log softmax(logits)[label] over masked nodes.
double nll_loss(const Matrix& logits, const LabelVector& y, const NodeMask& mask);
LossHead nll_head(const Matrix& logits, const LabelVector& y, const NodeMask& mask);

/// (1 / 2N) ||pred - targets||_F^2 with N = rows.
LossHead least_squares_head(const Matrix& pred, const Matrix& targets);
/// (1 / 2N) ||A X theta - Y||_F^2 on the raw adjacency.
double least_squares_loss(const SparseGraph& g, const Matrix& x, const Matrix& theta, const Matrix& y);

/// Reverse-mode pass through the tape.
Gradients backward(const Model& model, const Tape& tape, const LossHead& head);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;

  static OptimizerState create(const Model& model, AdamConfig config);
};

/// Adam with bias correction.
void adam_step(OptimizerState& state, Model& model, const Gradients& grads);

/// Argmax accuracy over masked nodes.
double accuracy(const Matrix& logits, const LabelVector& y, const NodeMask& mask);

}  // namespace mgnn

#endif  // MGNN_ENGINE_HPP
