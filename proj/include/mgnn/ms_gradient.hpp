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

#ifndef MGNN_MS_GRADIENT_HPP
#define MGNN_MS_GRADIENT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mgnn/coarsening.hpp"
#include "mgnn/engine.hpp"
#include "mgnn/trainers.hpp"

namespace mgnn {

/// Telescopic multiscale loss
///
///   L ~= (1/M_R) sum_j L^(R)_j + sum_{r=1}^{R-1} (1/M_r) sum_j (L^(r)_j - L^(r+1)_j)
///
/// where the scale-(r+1) data of sample j is a coarsening of its scale-r
/// data. Each difference term is averaged over the sample count of its finer
/// scale. (The other reading divides the (r, r+1) difference by M_{r+1}.)
struct TelescopeConfig {
  Index levels = 2;
  /// M_1 .. M_R, finest first; must strictly increase toward coarse scales.
  std::vector<Index> samples_per_term{1, 2};
  /// Fraction of a sample's nodes kept at each coarser scale.
  double retain_fraction = 0.75;
  /// Fraction of the graph's nodes drawn for one scale-1 sample.
  double sample_fraction = 0.25;
  /// Epochs before this use the telescopic gradient, later ones the plain
  /// fine loss.
  Index switch_epoch = 0;

  /// M_r = 2^(r-1), i.e. 1, 2, 4, ...
  static std::vector<Index> default_samples(Index levels);
  /// Full check, including strict ordering of samples_per_term.
  void validate() const;
  /// Only what telescopic_loss itself needs: R >= 1 and every M_r >= 1.
  void validate_counts() const;

  friend bool operator==(const TelescopeConfig&, const TelescopeConfig&) = default;
};

/// Data for one sample of one term. Term r < R pairs scale r with its
/// coarsening at scale r+1; the coarsest term R has no coarser side.
struct TermSample {
  GraphData at_scale;
  std::optional<GraphData> coarser;
};

class TelescopeSampler {
 public:
  virtual ~TelescopeSampler() = default;
  /// Next sample for term r (1-based). nullopt means the sampler is exhausted.
  virtual std::optional<TermSample> draw(Index term, Index levels) = 0;
};

/// Every scale of every sample is the same graph; the telescope then
/// collapses to the fine loss.
class IdenticalSampler : public TelescopeSampler {
 public:
  explicit IdenticalSampler(const GraphData& data) : data_(data) {}
  std::optional<TermSample> draw(Index term, Index levels) override;

 private:
  const GraphData& data_;
};

/// Hands out prepared samples per term in order, then reports exhaustion.
class FixedSampler : public TelescopeSampler {
 public:
  explicit FixedSampler(std::vector<std::vector<TermSample>> per_term) : per_term_(std::move(per_term)) {}
  std::optional<TermSample> draw(Index term, Index levels) override;

 private:
  std::vector<std::vector<TermSample>> per_term_;
  std::vector<Index> next_;
};

/// Transductive node-subset sampler: a scale-1 sample is the subgraph induced
/// by a random sample_fraction of the nodes; each coarser scale keeps a
/// random retain_fraction of the previous scale. Draws with an empty train
/// mask are repeated (bounded).
class SubsetSampler : public TelescopeSampler {
 public:
  SubsetSampler(const GraphData& data, const TelescopeConfig& cfg, std::uint64_t seed);
  std::optional<TermSample> draw(Index term, Index levels) override;

 private:
  std::optional<GraphData> subset(const GraphData& from, double fraction);

  const GraphData& data_;
  double sample_fraction_;
  double retain_fraction_;
  Rng rng_;
};

/// One evaluated loss inside the estimator, with its signed weight.
struct WeightedTape {
  Tape tape;
  LossHead head;
  double weight = 0.0;
  Index scale = 1;
};

struct TelescopeEstimate {
  double loss = 0.0;
  std::vector<WeightedTape> terms;
};

/// Evaluates the telescopic estimator. Each forward is charged to `flops`.
TelescopeEstimate telescopic_loss(const Model& model, TelescopeSampler& sampler, const TelescopeConfig& cfg,
                                  FlopCounter* flops = nullptr);

/// Gradient of the estimator: the weighted sum of per-term gradients.
Gradients backward(const Model& model, const TelescopeEstimate& estimate);

/// |loss_fine - loss_coarse| / loss_fine.
double loss_gap_gamma(double loss_coarse, double loss_fine);

/// Loss of the model on every level's train mask, finest first.
std::vector<double> level_losses(const Model& model, const LevelHierarchy& hierarchy);

/// gamma_r for r = 1..R between consecutive levels; gamma_1 = 0.
std::vector<double> gamma_profile(const Model& model, const LevelHierarchy& hierarchy);

struct GammaStats {
  std::vector<double> mean;
  std::vector<double> stderr_of_mean;
};

/// gamma_profile averaged over `draws` hierarchies built from `plan` with
/// seeds plan.seed, plan.seed + 1, ...
GammaStats gamma_statistics(const Model& model, const GraphData& data, CoarsenPlan plan, Index draws);

/// Epochs [0, switch_epoch) step on the telescopic gradient drawn from a
/// SubsetSampler; the rest on the plain fine loss. Total epochs come from
/// schedule.epochs_per_level[0].
TrainResult train_ms_gradient(Model& model, const GraphData& data, const TelescopeConfig& cfg,
                              const TrainSchedule& schedule, const GraphData* eval = nullptr);

}  // namespace mgnn

#endif  // MGNN_MS_GRADIENT_HPP
