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

#ifndef MGNN_TRAINERS_HPP
#define MGNN_TRAINERS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mgnn/coarsening.hpp"
#include "mgnn/engine.hpp"

namespace mgnn {

struct TrainSchedule {
  /// Epoch budget per level, finest level first (the layout used when
  /// quoting schedules such as [600, 1200, 2400, 4800]).
  std::vector<Index> epochs_per_level{100};
  AdamConfig adam;
  Index eval_every = 10;
  std::uint64_t seed = 0;
  /// When false the wall_ms column is written as 0 so logs are reproducible
  /// byte for byte.
  bool record_wall_time = false;

  void validate() const;
  Index total_epochs() const;

  /// [fine, 2 fine, 4 fine, ...], finest first.
  static std::vector<Index> doubling(Index fine_epochs, Index levels);
};

struct MetricRecord {
  Index level = 1;  // 1 = finest
  Index epoch = 0;  // global, 1-based
  double train_loss = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::uint64_t cum_flops = 0;
  double wall_ms = 0.0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct MetricLog {
  std::vector<MetricRecord> records;

  /// Header: level,epoch,train_loss,val_acc,test_acc,cum_flops,wall_ms
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
  MetricLog log;
  std::uint64_t total_flops = 0;
  double final_val_acc = 0.0;
  double final_test_acc = 0.0;
};

/// Callbacks fired around each level; `level` is 1-based, 1 = finest.
struct TrainHooks {
  std::function<void(Index level, const Model&)> on_level_start;
  std::function<void(Index level, const Model&)> on_level_end;
};

/// Argmax accuracy of the model on `mask` of `data`.
double evaluate(const Model& model, const GraphData& data, const NodeMask& mask);

/// Plain training on one graph for schedule.epochs_per_level[0] epochs.
/// Validation and test accuracy are measured on `eval` (defaults to `data`).
TrainResult train_single_level(Model& model, const GraphData& data, const TrainSchedule& schedule,
                               const GraphData* eval = nullptr, const TrainHooks& hooks = {});

/// Trains on the coarsest level first and walks to the finest, carrying the
/// weights and optimizer state across levels unchanged. Accuracy is always
/// measured on `eval`, defaulting to the original graph.
TrainResult coarse_to_fine(Model& model, const LevelHierarchy& hierarchy, const TrainSchedule& schedule,
                           const GraphData* eval = nullptr, const TrainHooks& hooks = {});

/// coarse_to_fine over a hierarchy of growing subgraphs (ego or nearest
/// policy) around a random centre.
TrainResult sub_to_full(Model& model, const GraphData& data, const CoarsenPlan& plan, const TrainSchedule& schedule,
                        const GraphData* eval = nullptr, const TrainHooks& hooks = {});

namespace detail {

/// Shared epoch loop. `step` runs one optimisation step and returns the
/// training loss it observed; it is responsible for counting FLOPs.
class TrainingLoop {
 public:
  TrainingLoop(Model& model, const GraphData& eval, const TrainSchedule& schedule);

  using Step = std::function<double(Model&, OptimizerState&, FlopCounter&)>;
  void run(Index level, Index epochs, const Step& step);
  /// Standard step: forward on `data`, NLL on its train mask, backward, Adam.
  static Step plain_step(const Model& model, const GraphData& data);
  TrainResult finish();

 private:
  void log(Index level, double loss);

  Model& model_;
  const GraphData& eval_;
  GraphOperators eval_ops_;
  const TrainSchedule& schedule_;
  OptimizerState state_;
  FlopCounter flops_;
  MetricLog log_;
  Index epoch_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail
}  // namespace mgnn

#endif  // MGNN_TRAINERS_HPP
