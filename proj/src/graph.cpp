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

#include "mgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mgnn/error.hpp"

namespace mgnn {

SparseGraph::SparseGraph(Index num_nodes, std::vector<Index> row_offsets, std::vector<Index> col_indices)
    : row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)) {
  require(row_offsets_.size() == num_nodes + 1, "SparseGraph: row_offsets must have num_nodes+1 entries");
  require(row_offsets_.front() == 0 && row_offsets_.back() == col_indices_.size(),
          "SparseGraph: row_offsets do not span col_indices");
  for (Index v = 0; v < num_nodes; ++v) {
    require(row_offsets_[v] <= row_offsets_[v + 1], "SparseGraph: row_offsets must be nondecreasing");
    auto row = neighbors(v);
    for (Index k = 0; k < row.size(); ++k) {
      require(row[k] < num_nodes, "SparseGraph: column index out of range");
      require(row[k] != v, "SparseGraph: self-loop at node " + std::to_string(v));
      require(k == 0 || row[k - 1] < row[k], "SparseGraph: row " + std::to_string(v) + " not strictly increasing");
    }
  }
  for (Index v = 0; v < num_nodes; ++v) {
    for (Index u : neighbors(v)) {
      require(has_edge(u, v), "SparseGraph: adjacency is not symmetric");
    }
  }
}

SparseGraph SparseGraph::from_edges(Index num_nodes, std::span<const std::pair<Index, Index>> edges) {
  std::vector<std::pair<Index, Index>> directed;
  directed.reserve(2 * edges.size());
  for (auto [u, v] : edges) {
    require(u < num_nodes && v < num_nodes, "edge endpoint out of range");
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  SparseGraph g;
  g.row_offsets_.assign(num_nodes + 1, 0);
  g.col_indices_.reserve(directed.size());
  for (auto [u, v] : directed) {
    ++g.row_offsets_[u + 1];
    g.col_indices_.push_back(v);
  }
  std::partial_sum(g.row_offsets_.begin(), g.row_offsets_.end(), g.row_offsets_.begin());
  return g;
}

bool SparseGraph::has_edge(Index from, Index to) const {
  auto row = neighbors(from);
  return std::binary_search(row.begin(), row.end(), to);
}

std::vector<std::pair<Index, Index>> SparseGraph::edge_list() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(num_undirected_edges());
  for (Index u = 0; u < num_nodes(); ++u) {
    for (Index v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  require(num_classes_ >= 1, "LabelVector: need at least one class");
  for (int label : labels_) {
    require(label >= 0 && label < num_classes_, "LabelVector: label " + std::to_string(label) + " out of range");
  }
}

Index count(const NodeMask& mask) { return static_cast<Index>(std::count(mask.begin(), mask.end(), true)); }

NodeSelection::NodeSelection(std::vector<Index> indices) : indices_(std::move(indices)) {
  require(!indices_.empty(), "NodeSelection: empty selection");
  for (Index i = 1; i < indices_.size(); ++i) {
    require(indices_[i - 1] < indices_[i], "NodeSelection: indices must be strictly increasing");
  }
}

NodeSelection NodeSelection::from_unsorted(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return NodeSelection(std::move(indices));
}

NodeSelection NodeSelection::all(Index n) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  return NodeSelection(std::move(idx));
}

void NodeSelection::check_against(Index parent_size) const {
  require(indices_.back() < parent_size, "NodeSelection: index " + std::to_string(indices_.back()) +
                                             " out of range for " + std::to_string(parent_size) + " nodes");
}

NodeSelection NodeSelection::compose(const NodeSelection& child) const {
  child.check_against(size());
  std::vector<Index> out;
  out.reserve(child.size());
  for (Index c : child.indices()) out.push_back(indices_[c]);
  return NodeSelection(std::move(out));
}

Coordinates::Coordinates(Matrix points) : points_(std::move(points)) {
  require(points_.cols() >= 1, "Coordinates: dimension must be at least 1");
  require(points_.allFinite(), "Coordinates: non-finite position");
}

void GraphData::check_consistent() const {
  const Index n = num_nodes();
  require(static_cast<Index>(features.rows()) == n, "GraphData: feature rows != num_nodes");
  require(labels.size() == n, "GraphData: label count != num_nodes");
  require(masks.train.size() == n && masks.val.size() == n && masks.test.size() == n,
          "GraphData: mask length != num_nodes");
  require(features.allFinite(), "GraphData: non-finite feature value");
  if (coords) require(coords->size() == n, "GraphData: coordinate rows != num_nodes");
}

SparseGraph graph_power(const SparseGraph& g, unsigned p, double edge_budget) {
  require(p >= 1, "graph_power: power must be at least 1");
  if (p == 1) return g;
  const Index n = g.num_nodes();
  const auto budget = static_cast<double>(g.num_edges()) * edge_budget;

  std::vector<Index> offsets(n + 1, 0);
  std::vector<Index> cols;
  std::vector<Index> frontier, next;
  std::vector<unsigned> stamp(n, 0);
  unsigned clock = 0;
  for (Index v = 0; v < n; ++v) {
    frontier.assign(g.neighbors(v).begin(), g.neighbors(v).end());
    for (unsigned step = 1; step < p; ++step) {
      ++clock;
      next.clear();
      for (Index u : frontier) {
        for (Index w : g.neighbors(u)) {
          if (stamp[w] != clock) {
            stamp[w] = clock;
            next.push_back(w);
          }
        }
      }
      std::swap(frontier, next);
    }
    std::sort(frontier.begin(), frontier.end());
    for (Index w : frontier) {
      if (w != v) cols.push_back(w);
    }
    offsets[v + 1] = cols.size();
    if (static_cast<double>(cols.size()) > budget) {
      throw Error("graph_power: p=" + std::to_string(p) + " exceeds the edge budget of " +
                  std::to_string(edge_budget) + "x the input edge count");
    }
  }
  return SparseGraph(n, std::move(offsets), std::move(cols));
}

SparseGraph induced_subgraph(const SparseGraph& g, const NodeSelection& sel) {
  sel.check_against(g.num_nodes());
  constexpr Index kAbsent = static_cast<Index>(-1);
  std::vector<Index> child_of(g.num_nodes(), kAbsent);
  for (Index a = 0; a < sel.size(); ++a) child_of[sel[a]] = a;

  std::vector<Index> offsets(sel.size() + 1, 0);
  std::vector<Index> cols;
  for (Index a = 0; a < sel.size(); ++a) {
    // Parent rows are sorted and child_of is monotone, so child rows stay sorted.
    for (Index w : g.neighbors(sel[a])) {
      if (child_of[w] != kAbsent) cols.push_back(child_of[w]);
    }
    offsets[a + 1] = cols.size();
  }
  return SparseGraph(sel.size(), std::move(offsets), std::move(cols));
}

namespace {

NodeMask gather(const NodeMask& mask, const NodeSelection& sel) {
  NodeMask out(sel.size());
  for (Index a = 0; a < sel.size(); ++a) out[a] = mask[sel[a]];
  return out;
}

Matrix gather_rows(const Matrix& m, const NodeSelection& sel) {
  Matrix out(static_cast<Eigen::Index>(sel.size()), m.cols());
  for (Index a = 0; a < sel.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = m.row(static_cast<Eigen::Index>(sel[a]));
  return out;
}

}  // namespace

RestrictedData restrict(const FeatureMatrix& x, const LabelVector& y, const SplitMasks& masks,
                        const NodeSelection& sel) {
  sel.check_against(static_cast<Index>(x.rows()));
  require(y.size() == static_cast<Index>(x.rows()), "restrict: labels and features disagree in length");
  std::vector<int> labels;
  labels.reserve(sel.size());
  for (Index i : sel.indices()) labels.push_back(y[i]);
  return {gather_rows(x, sel), LabelVector(std::move(labels), y.num_classes()),
          {gather(masks.train, sel), gather(masks.val, sel), gather(masks.test, sel)}};
}

Coordinates restrict(const Coordinates& coords, const NodeSelection& sel) {
  sel.check_against(coords.size());
  return Coordinates(gather_rows(coords.points(), sel));
}

GraphData coarsen(const GraphData& data, const NodeSelection& sel, unsigned power, double edge_budget) {
  auto r = restrict(data.features, data.labels, data.masks, sel);
  GraphData out{induced_subgraph(graph_power(data.graph, power, edge_budget), sel), std::move(r.features),
                std::move(r.labels), std::move(r.masks), std::nullopt};
  if (data.coords) out.coords = restrict(*data.coords, sel);
  return out;
}

std::vector<Index> degrees(const SparseGraph& g) {
  std::vector<Index> out(g.num_nodes());
  for (Index v = 0; v < g.num_nodes(); ++v) out[v] = g.degree(v);
  return out;
}

std::uint64_t gcn_layer_flops(std::uint64_t undirected_edges, std::uint64_t num_nodes, std::uint64_t c_in,
                              std::uint64_t c_out) {
  return 2 * undirected_edges * c_in + num_nodes * c_in * c_out;
}

}  // namespace mgnn
