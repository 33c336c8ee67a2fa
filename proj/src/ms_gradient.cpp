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

#include "mgnn/ms_gradient.hpp"

#include <cmath>
#include <memory>

#include "mgnn/error.hpp"

namespace mgnn {

std::vector<Index> TelescopeConfig::default_samples(Index levels) {
  std::vector<Index> out;
  for (Index r = 0; r < levels; ++r) out.push_back(Index{1} << r);
  return out;
}

void TelescopeConfig::validate_counts() const {
  require(levels >= 1, "TelescopeConfig: levels must be >= 1");
  require(samples_per_term.size() == levels, "TelescopeConfig: need one sample count per level");
  for (Index m : samples_per_term) require(m >= 1, "TelescopeConfig: sample counts must be >= 1");
}

void TelescopeConfig::validate() const {
  validate_counts();
  for (Index r = 1; r < levels; ++r) {
    require(samples_per_term[r] > samples_per_term[r - 1],
            "TelescopeConfig: sample counts must strictly increase toward coarser scales");
  }
  require(retain_fraction > 0.0 && retain_fraction < 1.0, "TelescopeConfig: retain_fraction must lie in (0, 1)");
  require(sample_fraction > 0.0 && sample_fraction <= 1.0, "TelescopeConfig: sample_fraction must lie in (0, 1]");
}

std::optional<TermSample> IdenticalSampler::draw(Index term, Index levels) {
  TermSample s{data_, std::nullopt};
  if (term < levels) s.coarser = data_;
  return s;
}

std::optional<TermSample> FixedSampler::draw(Index term, Index /*levels*/) {
  if (next_.size() < per_term_.size()) next_.resize(per_term_.size(), 0);
  if (term == 0 || term > per_term_.size()) return std::nullopt;
  auto& queue = per_term_[term - 1];
  Index& pos = next_[term - 1];
  if (pos >= queue.size()) return std::nullopt;
  return queue[pos++];
}

SubsetSampler::SubsetSampler(const GraphData& data, const TelescopeConfig& cfg, std::uint64_t seed)
    : data_(data), sample_fraction_(cfg.sample_fraction), retain_fraction_(cfg.retain_fraction), rng_(seed) {}

std::optional<GraphData> SubsetSampler::subset(const GraphData& from, double fraction) {
  const Index n = from.num_nodes();
  const Index m = std::max<Index>(1, static_cast<Index>(std::llround(fraction * static_cast<double>(n))));
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto sel = random_select(n, std::min(m, n), rng_);
    GraphData out = coarsen(from, sel, 1);
    if (count(out.masks.train) > 0) return out;
  }
  return std::nullopt;
}

std::optional<TermSample> SubsetSampler::draw(Index term, Index levels) {
  require(term >= 1 && term <= levels, "SubsetSampler: term out of range");
  std::optional<GraphData> cur = sample_fraction_ >= 1.0 ? std::optional<GraphData>(data_)
                                                         : subset(data_, sample_fraction_);
  for (Index s = 1; cur && s < term; ++s) cur = subset(*cur, retain_fraction_);
  if (!cur) throw Error("SubsetSampler: could not draw a sample with a nonempty train mask");
  TermSample out{std::move(*cur), std::nullopt};
  if (term < levels) {
    out.coarser = subset(out.at_scale, retain_fraction_);
    if (!out.coarser) throw Error("SubsetSampler: could not coarsen a sample with a nonempty train mask");
  }
  return out;
}

namespace {

WeightedTape evaluate_term(const Model& model, const GraphData& data, double weight, Index scale,
                           FlopCounter* flops) {
  auto fwd = forward(model, data.graph, data.features, flops);
  auto head = nll_head(fwd.logits, data.labels, data.masks.train);
  return {std::move(fwd.tape), std::move(head), weight, scale};
}

}  // namespace

TelescopeEstimate telescopic_loss(const Model& model, TelescopeSampler& sampler, const TelescopeConfig& cfg,
                                  FlopCounter* flops) {
  cfg.validate_counts();
  const Index levels = cfg.levels;
  TelescopeEstimate est;
  for (Index r = 1; r <= levels; ++r) {
    const Index samples = cfg.samples_per_term[r - 1];
    const double w = 1.0 / static_cast<double>(samples);
    for (Index j = 0; j < samples; ++j) {
      auto sample = sampler.draw(r, levels);
      if (!sample) {
        throw Error("telescopic_loss: sampler exhausted at term " + std::to_string(r) + ", sample " +
                    std::to_string(j + 1));
      }
      est.terms.push_back(evaluate_term(model, sample->at_scale, w, r, flops));
      if (r < levels) {
        require(sample->coarser.has_value(), "telescopic_loss: difference term needs a coarser sample");
        est.terms.push_back(evaluate_term(model, *sample->coarser, -w, r + 1, flops));
      }
    }
  }
  for (const auto& t : est.terms) est.loss += t.weight * t.head.value;
  return est;
}

Gradients backward(const Model& model, const TelescopeEstimate& estimate) {
  Gradients total = Gradients::zeros_like(model);
  for (const auto& t : estimate.terms) total.add_scaled(backward(model, t.tape, t.head), t.weight);
  return total;
}

double loss_gap_gamma(double loss_coarse, double loss_fine) {
  require(loss_fine != 0.0, "loss_gap_gamma: fine loss is zero, ratio undefined");
  return std::abs(loss_fine - loss_coarse) / loss_fine;
}

std::vector<double> level_losses(const Model& model, const LevelHierarchy& hierarchy) {
  std::vector<double> out;
  for (const auto& level : hierarchy.levels()) {
    const auto& d = level.data;
    out.push_back(nll_loss(forward(model, d.graph, d.features).logits, d.labels, d.masks.train));
  }
  return out;
}

std::vector<double> gamma_profile(const Model& model, const LevelHierarchy& hierarchy) {
  auto losses = level_losses(model, hierarchy);
  std::vector<double> gamma{0.0};
  for (std::size_t r = 1; r < losses.size(); ++r) gamma.push_back(loss_gap_gamma(losses[r], losses[r - 1]));
  return gamma;
}

GammaStats gamma_statistics(const Model& model, const GraphData& data, CoarsenPlan plan, Index draws) {
  require(draws >= 2, "gamma_statistics: need at least two draws");
  const std::uint64_t base = plan.seed;
  std::vector<double> sum(plan.levels, 0.0), sum_sq(plan.levels, 0.0);
  for (Index d = 0; d < draws; ++d) {
    plan.seed = base + d;
    auto gamma = gamma_profile(model, build_hierarchy(data, plan));
    for (Index r = 0; r < plan.levels; ++r) {
      sum[r] += gamma[r];
      sum_sq[r] += gamma[r] * gamma[r];
    }
  }
  GammaStats stats;
  const auto n = static_cast<double>(draws);
  for (Index r = 0; r < plan.levels; ++r) {
    const double mean = sum[r] / n;
    const double var = std::max(0.0, (sum_sq[r] - n * mean * mean) / (n - 1.0));
    stats.mean.push_back(mean);
    stats.stderr_of_mean.push_back(std::sqrt(var / n));
  }
  return stats;
}

TrainResult train_ms_gradient(Model& model, const GraphData& data, const TelescopeConfig& cfg,
                              const TrainSchedule& schedule, const GraphData* eval) {
  cfg.validate();
  detail::TrainingLoop loop(model, eval ? *eval : data, schedule);
  const Index total = schedule.epochs_per_level.front();
  const Index multiscale_epochs = std::min(cfg.switch_epoch, total);

  auto sampler = std::make_shared<SubsetSampler>(data, cfg, schedule.seed);
  detail::TrainingLoop::Step telescopic = [sampler, &cfg](Model& m, OptimizerState& state, FlopCounter& flops) {
    auto est = telescopic_loss(m, *sampler, cfg, &flops);
    if (std::isfinite(est.loss)) adam_step(state, m, backward(m, est));
    return est.loss;
  };
  loop.run(cfg.levels, multiscale_epochs, telescopic);
  loop.run(1, total - multiscale_epochs, detail::TrainingLoop::plain_step(model, data));
  return loop.finish();
}

}  // namespace mgnn
