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

#ifndef MGNN_DATASETS_HPP
#define MGNN_DATASETS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "mgnn/graph.hpp"

namespace mgnn {

/// Stochastic block model with balanced contiguous blocks. Features are the
/// one-hot block indicator plus Gaussian noise, so the channel count equals
/// the block count. Nodes are split 60/20/20 into train/val/test.
struct SbmSpec {
  Index num_nodes = 200;
  Index blocks = 4;
  double p_in = 0.1;
  double p_out = 0.01;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SbmSpec&, const SbmSpec&) = default;
};

GraphData gen_sbm(const SbmSpec& spec);

struct PointCloudGraph {
  SparseGraph graph;
  Coordinates coords;
};

/// Uniform points in [0,1]^dim joined by a symmetrized k-nearest-neighbour
/// graph; every node ends with degree >= k.
PointCloudGraph gen_knn_cloud(Index num_nodes, Index dim, Index k, std::uint64_t seed);

/// Synthetic "q-tip" rods on a jittered grid. A rod is a straight path of
/// rod_length grid cells (horizontal, vertical or diagonal) whose two end
/// cells are coloured blue or yellow. Rod type, and hence the label of every
/// rod node, depends on both end colours, so an interior node can only be
/// classified by a model whose receptive field reaches both ends.
///
/// Features (3 channels): blue end, yellow end, rod body (1 on every rod
/// node). Labels: 0 background, 1 blue-blue, 2 yellow-yellow, 3 mixed.
struct QtipsSpec {
  Index num_graphs = 1;
  Index grid_side = 16;
  Index rod_length = 7;
  Index rods_per_graph = 4;
  Index knn_k = 4;
  double jitter = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const QtipsSpec&, const QtipsSpec&) = default;
};

inline constexpr int kQtipsClasses = 4;

struct QtipsGraph {
  GraphData data;  // masks: every node in train
  /// Position along the rod (0 .. rod_length-1) or -1 for background.
  std::vector<int> rod_position;
};

std::vector<QtipsGraph> gen_qtips(const QtipsSpec& spec);

/// Block-diagonal union of several graphs. Coordinates, when every part has
/// them, are shifted along the first axis so the parts do not overlap.
GraphData disjoint_union(std::span<const GraphData> parts);

}  // namespace mgnn

#endif  // MGNN_DATASETS_HPP
