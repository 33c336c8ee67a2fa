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

#ifndef MGNN_CONFIG_HPP
#define MGNN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgnn/coarsening.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/engine.hpp"
#include "mgnn/error.hpp"
#include "mgnn/ms_gradient.hpp"
#include "mgnn/theory.hpp"

namespace mgnn {

enum class Mode { Baseline, CoarseToFine, SubToFull, MsGrad, Theorem, Flops, CoarsenInspect };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

/// Config problems; what() is "<source>:<line>: <message>".
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetConfig {
  enum class Kind { Sbm, Qtips, Knn, Files };
  Kind kind = Kind::Sbm;
  SbmSpec sbm;
  /// Training graphs come from qtips (num_graphs of them); evaluation graphs
  /// are generated separately, the first half used for validation and the
  /// second half for test.
  QtipsSpec qtips;
  Index qtips_eval_graphs = 8;
  /// Point-cloud task: labels are equal-width bins of the first coordinate,
  /// features are noisy coordinates.
  Index knn_nodes = 400;
  Index knn_dim = 3;
  Index knn_k = 6;
  Index knn_classes = 4;
  double knn_noise = 0.05;
  std::uint64_t knn_seed = 0;
  std::string edges, features, labels, masks;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct ModelConfig {
  LayerKind kind = LayerKind::GCN;
  Index hidden = 32;
  Index layers = 2;
  bool normalize_adjacency = true;
  bool bias = true;
  double gin_eps = 0.0;

  ModelSpec spec(Index input_channels, Index classes) const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ScheduleConfig {
  /// Fine-level epochs of the multilevel schedules; coarser levels double.
  Index fine_epochs = 100;
  /// Overrides the doubling schedule when nonempty (finest first).
  std::vector<Index> epochs_per_level;
  /// Epoch budget of baseline runs and of msgrad runs.
  Index baseline_epochs = 500;
  double lr = 0.01;
  Index eval_every = 10;
  bool record_wall_time = false;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct InspectConfig {
  /// Epochs of fine-level training before the "final" loss gaps; 0 skips it.
  Index train_epochs = 0;

  friend bool operator==(const InspectConfig&, const InspectConfig&) = default;
};

struct ExperimentConfig {
  Mode mode = Mode::Baseline;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
  Index jobs = 1;
  DatasetConfig dataset;
  ModelConfig model;
  std::optional<CoarsenPlan> plan;
  ScheduleConfig schedule;
  std::optional<TelescopeConfig> telescope;
  std::optional<TheoremConfig> theorem;
  InspectConfig inspect;

  /// Checks that the sections the mode needs are present and consistent.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a JSON config; errors name the source and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c).dump()) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace mgnn

#endif  // MGNN_CONFIG_HPP
