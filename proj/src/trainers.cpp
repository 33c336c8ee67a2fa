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

#include "mgnn/trainers.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mgnn/error.hpp"

namespace mgnn {

void TrainSchedule::validate() const {
  require(!epochs_per_level.empty(), "TrainSchedule: empty epoch schedule");
  for (Index e : epochs_per_level) require(e >= 1, "TrainSchedule: every level needs at least one epoch");
  require(eval_every >= 1, "TrainSchedule: eval_every must be >= 1");
  require(adam.lr > 0.0, "TrainSchedule: learning rate must be positive");
}

Index TrainSchedule::total_epochs() const {
  Index total = 0;
  for (Index e : epochs_per_level) total += e;
  return total;
}

std::vector<Index> TrainSchedule::doubling(Index fine_epochs, Index levels) {
  std::vector<Index> out;
  for (Index r = 0; r < levels; ++r) out.push_back(fine_epochs << r);
  return out;
}

std::string MetricLog::to_csv() const {
  std::ostringstream out;
  out << "level,epoch,train_loss,val_acc,test_acc,cum_flops,wall_ms\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.level << ',' << r.epoch << ',' << r.train_loss << ',' << r.val_acc << ',' << r.test_acc << ','
        << r.cum_flops << ',' << std::setprecision(6) << r.wall_ms << std::setprecision(17) << '\n';
  }
  return out.str();
}

void MetricLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv();
}

double evaluate(const Model& model, const GraphData& data, const NodeMask& mask) {
  return accuracy(forward(model, data.graph, data.features).logits, data.labels, mask);
}

namespace detail {

TrainingLoop::TrainingLoop(Model& model, const GraphData& eval, const TrainSchedule& schedule)
    : model_(model),
      eval_(eval),
      eval_ops_(GraphOperators::prepare(model, eval.graph)),
      schedule_(schedule),
      state_(OptimizerState::create(model, schedule.adam)),
      start_(std::chrono::steady_clock::now()) {
  schedule.validate();
  eval.check_consistent();
}

TrainingLoop::Step TrainingLoop::plain_step(const Model& model, const GraphData& data) {
  require(count(data.masks.train) > 0, "training: empty train mask");
  auto ops = std::make_shared<GraphOperators>(GraphOperators::prepare(model, data.graph));
  return [ops, &data](Model& m, OptimizerState& state, FlopCounter& flops) {
    auto fwd = forward(m, *ops, data.features, &flops);
    auto head = nll_head(fwd.logits, data.labels, data.masks.train);
    if (std::isfinite(head.value)) adam_step(state, m, backward(m, fwd.tape, head));
    return head.value;
  };
}

void TrainingLoop::run(Index level, Index epochs, const Step& step) {
  for (Index e = 0; e < epochs; ++e) {
    const double loss = step(model_, state_, flops_);
    ++epoch_;
    if (!std::isfinite(loss)) {
      throw Error("training diverged: non-finite loss at level " + std::to_string(level) + ", epoch " +
                  std::to_string(epoch_));
    }
    if ((e + 1) % schedule_.eval_every == 0 || e + 1 == epochs) log(level, loss);
  }
}

void TrainingLoop::log(Index level, double loss) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  auto logits = forward(model_, eval_ops_, eval_.features).logits;
  MetricRecord r;
  r.level = level;
  r.epoch = epoch_;
  r.train_loss = loss;
  r.val_acc = count(eval_.masks.val) > 0 ? accuracy(logits, eval_.labels, eval_.masks.val) : kNaN;
  r.test_acc = count(eval_.masks.test) > 0 ? accuracy(logits, eval_.labels, eval_.masks.test) : kNaN;
  r.cum_flops = flops_.total;
  if (schedule_.record_wall_time) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }
  log_.records.push_back(r);
}

TrainResult TrainingLoop::finish() {
  TrainResult result;
  result.total_flops = flops_.total;
  if (!log_.records.empty()) {
    result.final_val_acc = log_.records.back().val_acc;
    result.final_test_acc = log_.records.back().test_acc;
  }
  result.log = std::move(log_);
  return result;
}

}  // namespace detail

TrainResult train_single_level(Model& model, const GraphData& data, const TrainSchedule& schedule,
                               const GraphData* eval, const TrainHooks& hooks) {
  detail::TrainingLoop loop(model, eval ? *eval : data, schedule);
  if (hooks.on_level_start) hooks.on_level_start(1, model);
  loop.run(1, schedule.epochs_per_level.front(), detail::TrainingLoop::plain_step(model, data));
  if (hooks.on_level_end) hooks.on_level_end(1, model);
  return loop.finish();
}

TrainResult coarse_to_fine(Model& model, const LevelHierarchy& hierarchy, const TrainSchedule& schedule,
                           const GraphData* eval, const TrainHooks& hooks) {
  require(schedule.epochs_per_level.size() == hierarchy.size(),
          "coarse_to_fine: schedule has " + std::to_string(schedule.epochs_per_level.size()) +
              " entries for " + std::to_string(hierarchy.size()) + " levels");
  detail::TrainingLoop loop(model, eval ? *eval : hierarchy.fine(), schedule);
  for (Index r = hierarchy.size(); r-- > 0;) {
    const Index level = r + 1;
    if (hooks.on_level_start) hooks.on_level_start(level, model);
    loop.run(level, schedule.epochs_per_level[r], detail::TrainingLoop::plain_step(model, hierarchy.level(r).data));
    if (hooks.on_level_end) hooks.on_level_end(level, model);
  }
  return loop.finish();
}

TrainResult sub_to_full(Model& model, const GraphData& data, const CoarsenPlan& plan, const TrainSchedule& schedule,
                        const GraphData* eval, const TrainHooks& hooks) {
  require(plan.is_subgraph_based(), "sub_to_full: plan policy must be ego or nearest, got " + to_string(plan.policy));
  auto hierarchy = build_hierarchy(data, plan);
  return coarse_to_fine(model, hierarchy, schedule, eval ? eval : &data, hooks);
}

}  // namespace mgnn
