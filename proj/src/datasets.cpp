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

#include "mgnn/datasets.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mgnn/coarsening.hpp"
#include "mgnn/error.hpp"

namespace mgnn {

GraphData gen_sbm(const SbmSpec& spec) {
  require(spec.num_nodes >= 1 && spec.blocks >= 1 && spec.blocks <= spec.num_nodes, "gen_sbm: bad sizes");
  require(spec.p_in >= 0.0 && spec.p_in <= 1.0 && spec.p_out >= 0.0 && spec.p_out <= 1.0,
          "gen_sbm: probabilities must lie in [0, 1]");
  require(spec.feature_noise >= 0.0, "gen_sbm: feature noise must be nonnegative");
  Rng rng(spec.seed);
  const Index n = spec.num_nodes;

  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i * spec.blocks / n);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.blocks));
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < spec.blocks; ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          (labels[i] == static_cast<int>(k) ? 1.0 : 0.0) + spec.feature_noise * noise(rng);
    }
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  SplitMasks masks{NodeMask(n, false), NodeMask(n, false), NodeMask(n, false)};
  const Index n_train = n * 6 / 10, n_val = n * 2 / 10;
  for (Index k = 0; k < n; ++k) {
    (k < n_train ? masks.train : k < n_train + n_val ? masks.val : masks.test)[order[k]] = true;
  }

  GraphData data{SparseGraph::from_edges(n, edges), std::move(x),
                 LabelVector(std::move(labels), static_cast<int>(spec.blocks)), std::move(masks), std::nullopt};
  return data;
}

namespace {

SparseGraph knn_graph(const Matrix& pts, Index k, std::vector<std::pair<Index, Index>> extra_edges = {}) {
  const Index n = static_cast<Index>(pts.rows());
  std::vector<std::pair<double, Index>> dist;
  for (Index i = 0; i < n; ++i) {
    dist.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((pts.row(static_cast<Eigen::Index>(i)) - pts.row(static_cast<Eigen::Index>(j))).squaredNorm(), j);
    }
    const Index kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (Index t = 0; t < kk; ++t) extra_edges.emplace_back(i, dist[t].second);
  }
  return SparseGraph::from_edges(n, extra_edges);
}

}  // namespace

PointCloudGraph gen_knn_cloud(Index num_nodes, Index dim, Index k, std::uint64_t seed) {
  require(dim >= 1, "gen_knn_cloud: dim must be >= 1");
  require(k >= 1 && k < num_nodes, "gen_knn_cloud: need 1 <= k < num_nodes");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix pts(static_cast<Eigen::Index>(num_nodes), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = unit(rng);
  return {knn_graph(pts, k), Coordinates(pts)};
}

void QtipsSpec::validate() const {
  require(rod_length >= 2, "QtipsSpec: rod_length must be >= 2");
  require(rod_length <= grid_side, "QtipsSpec: rod does not fit in the grid");
  require(knn_k >= 2, "QtipsSpec: knn_k must be >= 2");
  require(num_graphs >= 1, "QtipsSpec: need at least one graph");
  require(jitter >= 0.0 && jitter < 0.5, "QtipsSpec: jitter must lie in [0, 0.5)");
}

std::vector<QtipsGraph> gen_qtips(const QtipsSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index side = spec.grid_side;
  const Index n = side * side;
  const long len = static_cast<long>(spec.rod_length);
  const std::pair<long, long> directions[] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  std::uniform_real_distribution<double> jitter(-spec.jitter, spec.jitter);
  std::uniform_int_distribution<int> pick_dir(0, 3), pick_type(1, 3), coin(0, 1);
  std::uniform_int_distribution<long> pick_cell(0, static_cast<long>(side) - 1);

  std::vector<QtipsGraph> out;
  for (Index g = 0; g < spec.num_graphs; ++g) {
    Matrix pts(static_cast<Eigen::Index>(n), 2);
    for (Index y = 0; y < side; ++y) {
      for (Index x = 0; x < side; ++x) {
        pts(static_cast<Eigen::Index>(y * side + x), 0) = static_cast<double>(x) + jitter(rng);
        pts(static_cast<Eigen::Index>(y * side + x), 1) = static_cast<double>(y) + jitter(rng);
      }
    }
    FeatureMatrix features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 3);
    std::vector<int> labels(n, 0);
    std::vector<int> position(n, -1);
    std::vector<bool> blocked(n, false);
    std::vector<std::pair<Index, Index>> rod_edges;

    for (Index rod = 0; rod < spec.rods_per_graph; ++rod) {
      std::vector<Index> cells;
      for (int attempt = 0; attempt < 1000 && cells.empty(); ++attempt) {
        auto [dx, dy] = directions[pick_dir(rng)];
        const long x0 = pick_cell(rng), y0 = pick_cell(rng);
        const long x1 = x0 + dx * (len - 1), y1 = y0 + dy * (len - 1);
        if (x1 < 0 || x1 >= static_cast<long>(side) || y1 < 0 || y1 >= static_cast<long>(side)) continue;
        std::vector<Index> candidate;
        for (long t = 0; t < len; ++t) {
          const auto id = static_cast<Index>((y0 + dy * t) * static_cast<long>(side) + (x0 + dx * t));
          if (blocked[id]) break;
          candidate.push_back(id);
        }
        if (candidate.size() == spec.rod_length) cells = std::move(candidate);
      }
      if (cells.empty()) {
        throw Error("gen_qtips: could not place rod " + std::to_string(rod + 1) + " in graph " +
                    std::to_string(g + 1) + "; use a larger grid or fewer rods");
      }
      // Keep a one-cell gap around every rod.
      for (Index id : cells) {
        const long cx = static_cast<long>(id % side), cy = static_cast<long>(id / side);
        for (long oy = -1; oy <= 1; ++oy) {
          for (long ox = -1; ox <= 1; ++ox) {
            const long bx = cx + ox, by = cy + oy;
            if (bx >= 0 && by >= 0 && bx < static_cast<long>(side) && by < static_cast<long>(side)) {
              blocked[static_cast<Index>(by * static_cast<long>(side) + bx)] = true;
            }
          }
        }
      }
      const int type = pick_type(rng);
      int color_a = type == 2 ? 1 : 0;  // 0 blue, 1 yellow
      int color_b = color_a;
      if (type == 3) {
        color_a = coin(rng);
        color_b = 1 - color_a;
      }
      for (Index t = 0; t < cells.size(); ++t) {
        const auto row = static_cast<Eigen::Index>(cells[t]);
        features(row, 2) = 1.0;
        labels[cells[t]] = type;
        position[cells[t]] = static_cast<int>(t);
        if (t > 0) rod_edges.emplace_back(cells[t - 1], cells[t]);
      }
      features(static_cast<Eigen::Index>(cells.front()), color_a) = 1.0;
      features(static_cast<Eigen::Index>(cells.back()), color_b) = 1.0;
    }

    QtipsGraph qg;
    qg.data.graph = knn_graph(pts, spec.knn_k, std::move(rod_edges));
    qg.data.features = std::move(features);
    qg.data.labels = LabelVector(std::move(labels), kQtipsClasses);
    qg.data.masks = SplitMasks::all_train(n);
    qg.data.coords = Coordinates(std::move(pts));
    qg.rod_position = std::move(position);
    out.push_back(std::move(qg));
  }
  return out;
}

GraphData disjoint_union(std::span<const GraphData> parts) {
  require(!parts.empty(), "disjoint_union: no parts");
  Index n = 0;
  const auto channels = parts.front().features.cols();
  const int classes = parts.front().labels.num_classes();
  bool all_coords = true;
  for (const auto& p : parts) {
    p.check_consistent();
    require(p.features.cols() == channels, "disjoint_union: feature widths differ");
    require(p.labels.num_classes() == classes, "disjoint_union: class counts differ");
    all_coords = all_coords && p.coords.has_value() && p.coords->dim() == parts.front().coords->dim();
    n += p.num_nodes();
  }
  GraphData out;
  out.features.resize(static_cast<Eigen::Index>(n), channels);
  std::vector<int> labels;
  labels.reserve(n);
  out.masks = {NodeMask(), NodeMask(), NodeMask()};
  std::vector<std::pair<Index, Index>> edges;
  Matrix coords;
  if (all_coords) coords.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(parts.front().coords->dim()));
  double shift = 0.0;
  Index base = 0;
  for (const auto& p : parts) {
    const auto rows = static_cast<Eigen::Index>(p.num_nodes());
    out.features.middleRows(static_cast<Eigen::Index>(base), rows) = p.features;
    labels.insert(labels.end(), p.labels.values().begin(), p.labels.values().end());
    out.masks.train.insert(out.masks.train.end(), p.masks.train.begin(), p.masks.train.end());
    out.masks.val.insert(out.masks.val.end(), p.masks.val.begin(), p.masks.val.end());
    out.masks.test.insert(out.masks.test.end(), p.masks.test.begin(), p.masks.test.end());
    for (auto [u, v] : p.graph.edge_list()) edges.emplace_back(base + u, base + v);
    if (all_coords) {
      const Matrix& pts = p.coords->points();
      const double lo = pts.col(0).minCoeff(), hi = pts.col(0).maxCoeff();
      auto block = coords.middleRows(static_cast<Eigen::Index>(base), rows);
      block = pts;
      block.col(0).array() += shift - lo;
      shift += (hi - lo) + 2.0;
    }
    base += p.num_nodes();
  }
  out.graph = SparseGraph::from_edges(n, edges);
  out.labels = LabelVector(std::move(labels), classes);
  if (all_coords) out.coords = Coordinates(std::move(coords));
  return out;
}

}  // namespace mgnn
