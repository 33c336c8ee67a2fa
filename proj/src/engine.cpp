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

#include "mgnn/engine.hpp"

#include <algorithm>
#include <cmath>

#include "mgnn/error.hpp"

namespace mgnn {

Propagator Propagator::adjacency(const SparseGraph& g) {
  Propagator p;
  p.offsets_ = g.row_offsets();
  p.cols_ = g.col_indices();
  p.values_.assign(p.cols_.size(), 1.0);
  return p;
}

Propagator Propagator::normalized(const SparseGraph& g) {
  const Index n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (Index v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  Propagator p;
  p.offsets_.assign(n + 1, 0);
  p.cols_.reserve(g.num_edges() + n);
  p.values_.reserve(g.num_edges() + n);
  for (Index v = 0; v < n; ++v) {
    bool diag_done = false;
    for (Index w : g.neighbors(v)) {
      if (!diag_done && w > v) {
        p.cols_.push_back(v);
        p.values_.push_back(inv_sqrt[v] * inv_sqrt[v]);
        diag_done = true;
      }
      p.cols_.push_back(w);
      p.values_.push_back(inv_sqrt[v] * inv_sqrt[w]);
    }
    if (!diag_done) {
      p.cols_.push_back(v);
      p.values_.push_back(inv_sqrt[v] * inv_sqrt[v]);
    }
    p.offsets_[v + 1] = p.cols_.size();
  }
  return p;
}

Matrix Propagator::apply(const Matrix& x) const {
  require(static_cast<Index>(x.rows()) == num_nodes(), "Propagator: row count mismatch");
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  const Eigen::Index c = x.cols();
  for (Index v = 0; v < num_nodes(); ++v) {
    double* out = y.data() + static_cast<Eigen::Index>(v) * c;
    for (Index k = offsets_[v]; k < offsets_[v + 1]; ++k) {
      const double* in = x.data() + static_cast<Eigen::Index>(cols_[k]) * c;
      const double a = values_[k];
      for (Eigen::Index j = 0; j < c; ++j) out[j] += a * in[j];
    }
  }
  return y;
}

std::string to_string(LayerKind kind) { return kind == LayerKind::GCN ? "gcn" : "gin"; }

LayerKind parse_layer_kind(const std::string& name) {
  if (name == "gcn") return LayerKind::GCN;
  if (name == "gin") return LayerKind::GIN;
  throw Error("unknown layer kind '" + name + "' (expected gcn|gin)");
}

namespace {

Matrix glorot(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

void mask_relu_grad(Matrix& grad, const Matrix& pre) {
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (pre.data()[i] <= 0.0) grad.data()[i] = 0.0;
  }
}

Matrix column_sums(const Matrix& m) { return m.colwise().sum(); }

}  // namespace

Model Model::create(const ModelSpec& spec, Rng& rng) {
  require(spec.channels.size() >= 2, "ModelSpec: need at least input and output widths");
  for (Index c : spec.channels) require(c >= 1, "ModelSpec: channel widths must be positive");
  Model model;
  model.normalize_adjacency = spec.normalize_adjacency;
  for (Index l = 0; l + 1 < spec.channels.size(); ++l) {
    Layer layer;
    layer.kind = spec.kind;
    layer.c_in = spec.channels[l];
    layer.c_out = spec.channels[l + 1];
    layer.weight = glorot(layer.c_in, layer.c_out, rng);
    if (spec.bias) layer.bias = Matrix::Zero(1, static_cast<Eigen::Index>(layer.c_out));
    if (spec.kind == LayerKind::GIN) {
      layer.weight2 = glorot(layer.c_out, layer.c_out, rng);
      if (spec.bias) layer.bias2 = Matrix::Zero(1, static_cast<Eigen::Index>(layer.c_out));
      layer.gin_eps = spec.gin_eps;
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::vector<Matrix*> Model::parameters() {
  std::vector<Matrix*> out;
  for (auto& layer : layers) {
    for (Matrix* m : {&layer.weight, &layer.bias, &layer.weight2, &layer.bias2}) {
      if (m->size() > 0) out.push_back(m);
    }
  }
  return out;
}

std::vector<const Matrix*> Model::parameters() const {
  std::vector<const Matrix*> out;
  for (const auto* m : const_cast<Model*>(this)->parameters()) out.push_back(m);
  return out;
}

Gradients Gradients::zeros_like(const Model& model) {
  Gradients g;
  for (const Matrix* p : model.parameters()) g.tensors.push_back(Matrix::Zero(p->rows(), p->cols()));
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  require(other.tensors.size() == tensors.size(), "Gradients: tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i] += scale * other.tensors[i];
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& t : tensors) m = std::max(m, t.cwiseAbs().maxCoeff());
  return m;
}

GraphOperators GraphOperators::prepare(const Model& model, const SparseGraph& g) {
  GraphOperators ops;
  ops.num_nodes = g.num_nodes();
  ops.undirected_edges = g.num_undirected_edges();
  bool need_gcn = false, need_sum = false;
  for (const auto& layer : model.layers) (layer.kind == LayerKind::GCN ? need_gcn : need_sum) = true;
  if (need_gcn) {
    ops.gcn = std::make_shared<Propagator>(model.normalize_adjacency ? Propagator::normalized(g)
                                                                     : Propagator::adjacency(g));
  }
  if (need_sum) ops.sum = std::make_shared<Propagator>(Propagator::adjacency(g));
  return ops;
}

std::uint64_t layer_flops(const Layer& layer, Index num_nodes, Index undirected_edges) {
  std::uint64_t flops = gcn_layer_flops(undirected_edges, num_nodes, layer.c_in, layer.c_out);
  if (layer.kind == LayerKind::GIN) flops += static_cast<std::uint64_t>(num_nodes) * layer.c_out * layer.c_out;
  return flops;
}

ForwardResult forward(const Model& model, const GraphOperators& ops, const Matrix& x, FlopCounter* counter) {
  require(!model.layers.empty(), "forward: model has no layers");
  require(static_cast<Index>(x.rows()) == ops.num_nodes, "forward: feature rows != graph nodes");
  require(static_cast<Index>(x.cols()) == model.input_channels(),
          "forward: feature width " + std::to_string(x.cols()) + " != model input width " +
              std::to_string(model.input_channels()));
  ForwardResult result;
  result.tape.ops = ops;
  Matrix h = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    require(static_cast<Index>(h.cols()) == layer.c_in, "forward: layer widths do not chain");
    Tape::LayerCache cache;
    cache.activated = l + 1 < model.layers.size();
    if (layer.kind == LayerKind::GCN) {
      require(ops.gcn != nullptr, "forward: operators lack a GCN propagator");
      cache.aggregated = ops.gcn->apply(h);
      cache.pre = cache.aggregated * layer.weight;
      if (layer.bias.size() > 0) cache.pre.rowwise() += layer.bias.row(0);
    } else {
      require(ops.sum != nullptr, "forward: operators lack a sum propagator");
      cache.aggregated = ops.sum->apply(h) + (1.0 + layer.gin_eps) * h;
      cache.pre1 = cache.aggregated * layer.weight;
      if (layer.bias.size() > 0) cache.pre1.rowwise() += layer.bias.row(0);
      cache.hidden = relu(cache.pre1);
      cache.pre = cache.hidden * layer.weight2;
      if (layer.bias2.size() > 0) cache.pre.rowwise() += layer.bias2.row(0);
    }
    if (counter) counter->add(layer_flops(layer, ops.num_nodes, ops.undirected_edges));
    cache.input = std::move(h);
    h = cache.activated ? relu(cache.pre) : cache.pre;
    result.tape.layers.push_back(std::move(cache));
    result.tape.shapes.emplace_back(layer.c_in, layer.c_out);
  }
  result.logits = std::move(h);
  return result;
}

ForwardResult forward(const Model& model, const SparseGraph& g, const Matrix& x, FlopCounter* counter) {
  return forward(model, GraphOperators::prepare(model, g), x, counter);
}

namespace {

void check_head(const Matrix& logits, const LabelVector& y, const NodeMask& mask) {
  require(y.size() == static_cast<Index>(logits.rows()) && mask.size() == y.size(),
          "loss: logits, labels and mask disagree in length");
  require(static_cast<int>(logits.cols()) >= y.num_classes(), "loss: fewer logit columns than classes");
}

}  // namespace

double nll_loss(const Matrix& logits, const LabelVector& y, const NodeMask& mask) {
  return nll_head(logits, y, mask).value;
}

LossHead nll_head(const Matrix& logits, const LabelVector& y, const NodeMask& mask) {
  check_head(logits, y, mask);
  const Index m = count(mask);
  require(m > 0, "nll_loss: empty mask");
  LossHead head;
  head.d_logits = Matrix::Zero(logits.rows(), logits.cols());
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Index i = 0; i < y.size(); ++i) {
    if (!mask[i]) continue;
    auto row = logits.row(static_cast<Eigen::Index>(i));
    const double shift = row.maxCoeff();
    Eigen::RowVectorXd e = (row.array() - shift).exp();
    const double z = e.sum();
    head.value -= (row(y[i]) - shift - std::log(z)) * inv_m;
    auto grad = head.d_logits.row(static_cast<Eigen::Index>(i));
    grad = e / z * inv_m;
    grad(y[i]) -= inv_m;
  }
  return head;
}

LossHead least_squares_head(const Matrix& pred, const Matrix& targets) {
  require(pred.rows() == targets.rows() && pred.cols() == targets.cols(), "least squares: shape mismatch");
  require(pred.rows() > 0, "least squares: no rows");
  const double n = static_cast<double>(pred.rows());
  Matrix diff = pred - targets;
  return {diff.squaredNorm() / (2.0 * n), diff / n};
}

double least_squares_loss(const SparseGraph& g, const Matrix& x, const Matrix& theta, const Matrix& y) {
  require(static_cast<Index>(x.rows()) == g.num_nodes(), "least_squares_loss: feature rows != nodes");
  require(x.cols() == theta.rows(), "least_squares_loss: theta rows != feature width");
  return least_squares_head(Propagator::adjacency(g).apply(x) * theta, y).value;
}

Gradients backward(const Model& model, const Tape& tape, const LossHead& head) {
  require(tape.layers.size() == model.layers.size(), "backward: tape depth does not match model");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    require(tape.shapes[l] == std::make_pair(model.layers[l].c_in, model.layers[l].c_out),
            "backward: tape shapes do not match model");
  }
  require(head.d_logits.rows() == tape.layers.back().pre.rows() && head.d_logits.cols() == tape.layers.back().pre.cols(),
          "backward: loss gradient shape does not match logits");

  Gradients grads = Gradients::zeros_like(model);
  // Parameter slots per layer, walking the same order as Model::parameters().
  std::vector<std::size_t> first_slot(model.layers.size());
  std::size_t slot = 0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    first_slot[l] = slot;
    const Layer& layer = model.layers[l];
    slot += 1 + (layer.bias.size() > 0) + (layer.weight2.size() > 0) + (layer.bias2.size() > 0);
  }

  Matrix grad_out = head.d_logits;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Layer& layer = model.layers[l];
    const Tape::LayerCache& cache = tape.layers[l];
    Matrix d_pre = std::move(grad_out);
    if (cache.activated) mask_relu_grad(d_pre, cache.pre);
    std::size_t s = first_slot[l];
    if (layer.kind == LayerKind::GCN) {
      grads.tensors[s++] = cache.aggregated.transpose() * d_pre;
      if (layer.bias.size() > 0) grads.tensors[s++] = column_sums(d_pre);
      if (l == 0) break;
      grad_out = tape.ops.gcn->apply(d_pre * layer.weight.transpose());
    } else {
      Matrix d_hidden = d_pre * layer.weight2.transpose();
      Matrix d_pre1 = d_hidden;
      mask_relu_grad(d_pre1, cache.pre1);
      grads.tensors[s++] = cache.aggregated.transpose() * d_pre1;
      if (layer.bias.size() > 0) grads.tensors[s++] = column_sums(d_pre1);
      grads.tensors[s++] = cache.hidden.transpose() * d_pre;
      if (layer.bias2.size() > 0) grads.tensors[s++] = column_sums(d_pre);
      if (l == 0) break;
      Matrix d_agg = d_pre1 * layer.weight.transpose();
      grad_out = tape.ops.sum->apply(d_agg) + (1.0 + layer.gin_eps) * d_agg;
    }
  }
  return grads;
}

OptimizerState OptimizerState::create(const Model& model, AdamConfig config) {
  OptimizerState state;
  state.config = config;
  for (const Matrix* p : model.parameters()) {
    state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return state;
}

void adam_step(OptimizerState& state, Model& model, const Gradients& grads) {
  auto params = model.parameters();
  require(params.size() == grads.tensors.size() && params.size() == state.first_moment.size(),
          "adam_step: parameter/gradient/state count mismatch");
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = grads.tensors[i];
    require(g.rows() == params[i]->rows() && g.cols() == params[i]->cols(), "adam_step: gradient shape mismatch");
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    params[i]->array() -= c.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.eps);
  }
}

double accuracy(const Matrix& logits, const LabelVector& y, const NodeMask& mask) {
  require(y.size() == static_cast<Index>(logits.rows()) && mask.size() == y.size(),
          "accuracy: logits, labels and mask disagree in length");
  const Index m = count(mask);
  require(m > 0, "accuracy: empty mask");
  Index correct = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (!mask[i]) continue;
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    if (best == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m);
}

}  // namespace mgnn
