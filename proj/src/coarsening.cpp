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

#include "mgnn/coarsening.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>

#include "mgnn/error.hpp"

namespace mgnn {

std::string to_string(CoarsenPolicy policy) {
  switch (policy) {
    case CoarsenPolicy::Random: return "random";
    case CoarsenPolicy::Topk: return "topk";
    case CoarsenPolicy::Ego: return "ego";
    case CoarsenPolicy::NearestGeometric: return "nearest";
    case CoarsenPolicy::Hybrid: return "hybrid";
  }
  return "?";
}

CoarsenPolicy parse_policy(const std::string& name) {
  for (auto p : {CoarsenPolicy::Random, CoarsenPolicy::Topk, CoarsenPolicy::Ego, CoarsenPolicy::NearestGeometric,
                 CoarsenPolicy::Hybrid}) {
    if (to_string(p) == name) return p;
  }
  throw Error("unknown coarsening policy '" + name + "' (expected random|topk|ego|nearest|hybrid)");
}

void CoarsenPlan::validate() const {
  require(levels >= 1, "CoarsenPlan: levels must be >= 1");
  require(ratio > 0.0 && ratio < 1.0, "CoarsenPlan: ratio must lie in (0, 1)");
  for (unsigned p : power) require(p >= 1, "CoarsenPlan: power must be >= 1");
  require(power.size() <= 1 || power.size() + 1 >= levels, "CoarsenPlan: power list shorter than levels - 1");
  require(hybrid_subgraph == CoarsenPolicy::Ego || hybrid_subgraph == CoarsenPolicy::NearestGeometric,
          "CoarsenPlan: hybrid_subgraph must be ego or nearest");
  require(max_retries >= 1, "CoarsenPlan: max_retries must be >= 1");
  if (levels > 1 && (policy == CoarsenPolicy::Ego || policy == CoarsenPolicy::Hybrid)) {
    require(!ego_hops.empty(), "CoarsenPlan: ego policy needs ego_hops");
  }
}

unsigned CoarsenPlan::power_at(Index step) const {
  if (power.empty()) return 1;
  return power.size() == 1 ? power.front() : power.at(step);
}

Index CoarsenPlan::hops_at(Index step) const {
  require(!ego_hops.empty(), "CoarsenPlan: ego_hops is empty");
  return ego_hops[std::min(step, ego_hops.size() - 1)];
}

CoarsenPolicy CoarsenPlan::policy_at(Index step) const {
  if (policy != CoarsenPolicy::Hybrid) return policy;
  return step % 2 == 0 ? CoarsenPolicy::Random : hybrid_subgraph;
}

bool CoarsenPlan::is_subgraph_based() const {
  return policy == CoarsenPolicy::Ego || policy == CoarsenPolicy::NearestGeometric;
}

LevelHierarchy::LevelHierarchy(std::vector<Level> levels) : levels_(std::move(levels)) {
  require(!levels_.empty(), "LevelHierarchy: needs at least one level");
}

NodeSelection random_select(Index n, Index m_target, Rng& rng) {
  require(m_target >= 1, "random_select: m_target must be >= 1");
  require(m_target <= n, "random_select: m_target exceeds node count");
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<Index> picked;
  picked.reserve(m_target);
  // Selection sampling keeps the input order, so the result is sorted.
  std::sample(all.begin(), all.end(), std::back_inserter(picked), m_target, rng);
  return NodeSelection(std::move(picked));
}

NodeSelection topk_select(const SparseGraph& g, Index m_target) {
  require(m_target >= 1 && m_target <= g.num_nodes(), "topk_select: m_target must lie in [1, num_nodes]");
  std::vector<Index> order(g.num_nodes());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return g.degree(a) > g.degree(b); });
  order.resize(m_target);
  return NodeSelection::from_unsorted(std::move(order));
}

NodeSelection ego_select(const SparseGraph& g, Index root, Index hops) {
  require(root < g.num_nodes(), "ego_select: root out of range");
  std::vector<Index> dist(g.num_nodes(), static_cast<Index>(-1));
  std::deque<Index> queue{root};
  dist[root] = 0;
  std::vector<Index> ball{root};
  while (!queue.empty()) {
    Index u = queue.front();
    queue.pop_front();
    if (dist[u] == hops) continue;
    for (Index w : g.neighbors(u)) {
      if (dist[w] == static_cast<Index>(-1)) {
        dist[w] = dist[u] + 1;
        ball.push_back(w);
        queue.push_back(w);
      }
    }
  }
  return NodeSelection::from_unsorted(std::move(ball));
}

NodeSelection nearest_select(const Coordinates& coords, Index root, Index m_target) {
  const Index n = coords.size();
  require(root < n, "nearest_select: root out of range");
  require(m_target >= 1 && m_target <= n, "nearest_select: m_target must lie in [1, n]");
  const auto& pts = coords.points();
  std::vector<std::pair<double, Index>> by_distance;
  by_distance.reserve(n - 1);
  for (Index i = 0; i < n; ++i) {
    if (i == root) continue;
    double d2 = (pts.row(static_cast<Eigen::Index>(i)) - pts.row(static_cast<Eigen::Index>(root))).squaredNorm();
    by_distance.emplace_back(d2, i);
  }
  std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(m_target - 1),
                    by_distance.end());
  std::vector<Index> picked{root};
  for (Index k = 0; k + 1 < m_target; ++k) picked.push_back(by_distance[k].second);
  return NodeSelection::from_unsorted(std::move(picked));
}

Index coarse_size(Index n, double ratio) {
  require(n >= 2, "cannot coarsen a graph with fewer than 2 nodes");
  auto m = static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
  return std::clamp<Index>(m, 1, n - 1);
}

namespace {

Index draw_node(Index n, Rng& rng) { return std::uniform_int_distribution<Index>(0, n - 1)(rng); }

std::optional<Index> local_index(const NodeSelection& to_root, Index root_node) {
  const auto& idx = to_root.indices();
  auto it = std::lower_bound(idx.begin(), idx.end(), root_node);
  if (it == idx.end() || *it != root_node) return std::nullopt;
  return static_cast<Index>(it - idx.begin());
}

}  // namespace

LevelHierarchy build_hierarchy(const GraphData& data, const CoarsenPlan& plan) {
  plan.validate();
  data.check_consistent();
  Rng rng(plan.seed);

  std::vector<Level> levels;
  levels.push_back({data, NodeSelection::all(data.num_nodes()), NodeSelection::all(data.num_nodes())});
  // Level-1 index of the current ego centre, kept while it survives so that
  // successive ego levels stay centred on the same node.
  std::optional<Index> ego_root;

  for (Index step = 0; step + 1 < plan.levels; ++step) {
    const Level& parent = levels.back();
    const GraphData& cur = parent.data;
    const Index n = cur.num_nodes();
    const CoarsenPolicy policy = plan.policy_at(step);
    const std::string level_name = "level " + std::to_string(step + 2);
    require(n >= 2, "build_hierarchy: " + level_name + " cannot be derived from a single-node graph");
    if (policy == CoarsenPolicy::NearestGeometric) {
      require(cur.coords.has_value(), "build_hierarchy: nearest policy requires coordinates");
    }

    std::optional<Level> accepted;
    for (unsigned attempt = 0; attempt < plan.max_retries && !accepted; ++attempt) {
      std::optional<NodeSelection> sel;
      switch (policy) {
        case CoarsenPolicy::Random:
          sel = random_select(n, coarse_size(n, plan.ratio), rng);
          break;
        case CoarsenPolicy::Topk:
          sel = topk_select(cur.graph, coarse_size(n, plan.ratio));
          break;
        case CoarsenPolicy::Ego: {
          std::optional<Index> root;
          if (attempt == 0 && ego_root) root = local_index(parent.to_root, *ego_root);
          if (!root) root = draw_node(n, rng);
          sel = ego_select(cur.graph, *root, plan.hops_at(step));
          ego_root = parent.to_root[*root];
          break;
        }
        case CoarsenPolicy::NearestGeometric:
          sel = nearest_select(*cur.coords, draw_node(n, rng), coarse_size(n, plan.ratio));
          break;
        case CoarsenPolicy::Hybrid:
          throw Error("unreachable: hybrid resolves per step");
      }
      GraphData child = coarsen(cur, *sel, plan.power_at(step), plan.edge_budget);
      if (count(child.masks.train) == 0) continue;
      NodeSelection to_root = parent.to_root.compose(*sel);
      accepted = Level{std::move(child), std::move(*sel), std::move(to_root)};
    }
    if (!accepted) {
      throw Error("build_hierarchy: " + level_name + " has an empty train mask after " +
                  std::to_string(plan.max_retries) + " attempts");
    }
    levels.push_back(std::move(*accepted));
  }
  return LevelHierarchy(std::move(levels));
}

}  // namespace mgnn
