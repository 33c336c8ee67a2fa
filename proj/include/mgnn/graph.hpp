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

#ifndef MGNN_GRAPH_HPP
#define MGNN_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mgnn {

using Index = std::size_t;

/// Dense row-major real matrix. Node features, logits, weights and targets
/// all use this layout: one row per node (or per input channel for weights).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureMatrix = Matrix;

/// Immutable binary undirected graph in CSR form.
///
/// Every undirected edge {i, j} is stored twice, as (i, j) and (j, i), so
/// num_edges() counts directed entries. Rows are sorted and the diagonal is
/// always empty.
class SparseGraph {
 public:
  SparseGraph() : row_offsets_{0} {}

  /// Takes ownership of a CSR structure and validates every invariant.
  SparseGraph(Index num_nodes, std::vector<Index> row_offsets, std::vector<Index> col_indices);

  /// Builds a graph from an arbitrary edge list. Edges are symmetrized and
  /// deduplicated; self-loops are dropped.
  static SparseGraph from_edges(Index num_nodes, std::span<const std::pair<Index, Index>> edges);

  Index num_nodes() const { return row_offsets_.size() - 1; }
  Index num_edges() const { return col_indices_.size(); }
  Index num_undirected_edges() const { return col_indices_.size() / 2; }

  std::span<const Index> neighbors(Index node) const {
    return {col_indices_.data() + row_offsets_[node], row_offsets_[node + 1] - row_offsets_[node]};
  }
  Index degree(Index node) const { return row_offsets_[node + 1] - row_offsets_[node]; }
  bool has_edge(Index from, Index to) const;

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }

  /// Undirected edge list with u < v, in row order.
  std::vector<std::pair<Index, Index>> edge_list() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
};

/// Class label per node, each in [0, num_classes).
class LabelVector {
 public:
  LabelVector() = default;
  LabelVector(std::vector<int> labels, int num_classes);

  Index size() const { return labels_.size(); }
  int num_classes() const { return num_classes_; }
  int operator[](Index i) const { return labels_[i]; }
  const std::vector<int>& values() const { return labels_; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> labels_;
  int num_classes_ = 0;
};

using NodeMask = std::vector<bool>;

struct SplitMasks {
  NodeMask train;
  NodeMask val;
  NodeMask test;

  static SplitMasks all_train(Index n) { return {NodeMask(n, true), NodeMask(n, false), NodeMask(n, false)}; }
  friend bool operator==(const SplitMasks&, const SplitMasks&) = default;
};

Index count(const NodeMask& mask);

/// Sorted, unique, nonempty node indices into a parent graph. This is the
/// index form of a binary injection matrix P: column a of P is the indicator
/// of parent node indices()[a].
class NodeSelection {
 public:
  explicit NodeSelection(std::vector<Index> indices);

  /// Sorts and deduplicates before validating.
  static NodeSelection from_unsorted(std::vector<Index> indices);
  static NodeSelection all(Index n);

  Index size() const { return indices_.size(); }
  Index operator[](Index i) const { return indices_[i]; }
  const std::vector<Index>& indices() const { return indices_; }

  /// Throws unless every index is below parent_size.
  void check_against(Index parent_size) const;

  /// Maps a selection made on the child graph back to this selection's
  /// parent: result[i] = (*this)[child[i]].
  NodeSelection compose(const NodeSelection& child) const;

  friend bool operator==(const NodeSelection&, const NodeSelection&) = default;

 private:
  std::vector<Index> indices_;
};

/// Optional node positions, one row per node.
class Coordinates {
 public:
  Coordinates() = default;
  explicit Coordinates(Matrix points);

  Index size() const { return static_cast<Index>(points_.rows()); }
  Index dim() const { return static_cast<Index>(points_.cols()); }
  const Matrix& points() const { return points_; }

 private:
  Matrix points_;
};

/// One graph with everything attached to its nodes.
struct GraphData {
  SparseGraph graph;
  FeatureMatrix features;
  LabelVector labels;
  SplitMasks masks;
  std::optional<Coordinates> coords;

  Index num_nodes() const { return graph.num_nodes(); }
  /// Throws if any per-node array disagrees with the graph size.
  void check_consistent() const;
};

inline constexpr double kDefaultEdgeBudget = 32.0;

/// Binary p-th power of the adjacency: (i, j) is an edge when a walk of
/// exactly p steps joins them and i != j. p == 1 returns the graph itself.
/// Throws when p == 0 or the result would exceed edge_budget times the input
/// edge count.
SparseGraph graph_power(const SparseGraph& g, unsigned p, double edge_budget = kDefaultEdgeBudget);

/// Graph on the selected nodes: child edge (a, b) exists iff
/// (sel[a], sel[b]) is an edge of g.
SparseGraph induced_subgraph(const SparseGraph& g, const NodeSelection& sel);

struct RestrictedData {
  FeatureMatrix features;
  LabelVector labels;
  SplitMasks masks;
};

/// Row-gather of features, labels and masks by sel.
RestrictedData restrict(const FeatureMatrix& x, const LabelVector& y, const SplitMasks& masks,
                        const NodeSelection& sel);
Coordinates restrict(const Coordinates& coords, const NodeSelection& sel);

/// Coarse graph data: induced_subgraph(graph_power(A, p), sel) plus gathered
/// node data.
GraphData coarsen(const GraphData& data, const NodeSelection& sel, unsigned power,
                  double edge_budget = kDefaultEdgeBudget);

std::vector<Index> degrees(const SparseGraph& g);

/// Multiply count of one GCN layer: 2|E| c_in + |V| c_in c_out, where |E|
/// counts undirected edges.
std::uint64_t gcn_layer_flops(std::uint64_t undirected_edges, std::uint64_t num_nodes,
                              std::uint64_t c_in, std::uint64_t c_out);

}  // namespace mgnn

#endif  // MGNN_GRAPH_HPP
