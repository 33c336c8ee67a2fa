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

#ifndef MGNN_COARSENING_HPP
#define MGNN_COARSENING_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mgnn/graph.hpp"

namespace mgnn {

using Rng = std::mt19937_64;

enum class CoarsenPolicy { Random, Topk, Ego, NearestGeometric, Hybrid };

std::string to_string(CoarsenPolicy policy);
CoarsenPolicy parse_policy(const std::string& name);

/// How to build a hierarchy of R levels. Level 1 is the input; each
/// coarsening step selects nodes of the current level, raises the current
/// adjacency to `power` and takes the induced subgraph.
struct CoarsenPlan {
  Index levels = 1;
  /// Fraction of the current level's nodes kept by Random, Topk and
  /// NearestGeometric steps.
  double ratio = 0.5;
  /// Power per coarsening step (levels - 1 entries). A single entry is
  /// broadcast to every step; empty means 1.
  std::vector<unsigned> power{1};
  CoarsenPolicy policy = CoarsenPolicy::Random;
  /// Ego radius for the step producing level r+2 (entry r). Shorter lists
  /// repeat their last entry.
  std::vector<Index> ego_hops{6, 4, 2};
  /// Subgraph flavour used by the odd steps of Hybrid.
  CoarsenPolicy hybrid_subgraph = CoarsenPolicy::Ego;
  std::uint64_t seed = 0;
  unsigned max_retries = 16;
  double edge_budget = kDefaultEdgeBudget;

  void validate() const;
  unsigned power_at(Index step) const;
  Index hops_at(Index step) const;
  /// Policy actually applied at a step; resolves Hybrid (Random first).
  CoarsenPolicy policy_at(Index step) const;
  bool is_subgraph_based() const;

  friend bool operator==(const CoarsenPlan&, const CoarsenPlan&) = default;
};

struct Level {
  GraphData data;
  /// Selection into the previous (finer) level; all nodes for level 1.
  NodeSelection to_parent;
  /// Composed selection back into level 1.
  NodeSelection to_root;
};

/// levels()[0] is the original data, levels()[R-1] the coarsest.
class LevelHierarchy {
 public:
  explicit LevelHierarchy(std::vector<Level> levels);

  Index size() const { return levels_.size(); }
  const Level& level(Index r) const { return levels_.at(r); }
  const std::vector<Level>& levels() const { return levels_; }
  const GraphData& fine() const { return levels_.front().data; }

 private:
  std::vector<Level> levels_;
};

NodeSelection random_select(Index n, Index m_target, Rng& rng);

/// The m_target highest-degree nodes; ties go to the lower index.
NodeSelection topk_select(const SparseGraph& g, Index m_target);

/// Nodes within `hops` BFS steps of root, root included.
NodeSelection ego_select(const SparseGraph& g, Index root, Index hops);

/// Root plus its m_target - 1 nearest nodes in Euclidean distance; ties go
/// to the lower index.
NodeSelection nearest_select(const Coordinates& coords, Index root, Index m_target);

/// Node count kept by a ratio-based step: round(ratio * n) clamped to
/// [1, n - 1].
Index coarse_size(Index n, double ratio);

LevelHierarchy build_hierarchy(const GraphData& data, const CoarsenPlan& plan);

}  // namespace mgnn

#endif  // MGNN_COARSENING_HPP
