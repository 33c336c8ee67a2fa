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

#ifndef MGNN_EXPERIMENT_HPP
#define MGNN_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgnn/config.hpp"
#include "mgnn/graph.hpp"

namespace mgnn {

/// Command-line overrides applied on top of a config.
struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_dir;
  std::optional<Index> jobs;
  std::optional<Mode> mode;
};

/// Data a run trains on plus, for inductive tasks, a separate evaluation graph.
struct Task {
  GraphData train;
  std::optional<GraphData> eval;

  const GraphData& eval_data() const { return eval ? *eval : train; }
};

/// Materializes the dataset section. Generators use the dataset's own seed.
Task build_task(const DatasetConfig& dataset);

/// Per-level statistics of a hierarchy, finest first.
struct LevelStats {
  Index level = 1;
  Index nodes = 0;
  Index edges = 0;  // undirected
  Index train_nodes = 0;
  double edge_ratio = 1.0;  // edges relative to the finest level
  double node_ratio = 1.0;
  double loss = 0.0;        // NLL of the inspected model on this level
  double delta_loss = 0.0;  // |loss - fine loss|
  double gamma = 0.0;
};

/// Hierarchy statistics for the model's current weights.
std::vector<LevelStats> inspect_hierarchy(const Model& model, const LevelHierarchy& hierarchy);

struct RunReport {
  std::filesystem::path out_dir;
  nlohmann::json summary;
  std::vector<std::string> warnings;
};

/// Effective output directory: --out, then MGNN_OUT_DIR, then the config.
std::filesystem::path resolve_out_dir(const ExperimentConfig& config, const RunOptions& options);

/// Runs every seed of the config's mode and writes per-seed artifacts,
/// summary.json and manifest.json. Progress lines go to `log`.
RunReport run_experiment(ExperimentConfig config, const RunOptions& options, std::ostream& log);

}  // namespace mgnn

#endif  // MGNN_EXPERIMENT_HPP
