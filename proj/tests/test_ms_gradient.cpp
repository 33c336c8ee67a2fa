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

#include <doctest.h>

#include <cmath>
#include <set>

#include "mgnn/checkpoint.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/error.hpp"
#include "mgnn/ms_gradient.hpp"
#include "oracles.hpp"

using namespace mgnn;

namespace {

Model fresh_model(const GraphData& d, std::uint64_t seed, LayerKind kind = LayerKind::GCN) {
  ModelSpec spec;
  spec.kind = kind;
  spec.channels = {static_cast<Index>(d.features.cols()), 8, static_cast<Index>(d.labels.num_classes())};
  Rng rng(seed);
  return Model::create(spec, rng);
}

TelescopeConfig config(Index levels, std::vector<Index> samples) {
  TelescopeConfig c;
  c.levels = levels;
  c.samples_per_term = std::move(samples);
  return c;
}

double fine_loss(const Model& m, const GraphData& d) {
  return nll_loss(forward(m, d.graph, d.features).logits, d.labels, d.masks.train);
}

double oracle_loss(const Model& m, const GraphData& d) {
  return oracle::nll(oracle::forward(m, oracle::to_dense(d.graph), d.features), d.labels.values(), d.masks.train);
}

}  // namespace

TEST_CASE("loss_gap_gamma examples") {
  CHECK(loss_gap_gamma(0.94, 1.0) == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(loss_gap_gamma(1.0, 1.0) == 0.0);
  CHECK(loss_gap_gamma(2.0, 1.0) == 1.0);
  CHECK_THROWS_AS(loss_gap_gamma(1.0, 0.0), Error);
}

TEST_CASE("default sample counts and validation") {
  CHECK(TelescopeConfig::default_samples(4) == std::vector<Index>{1, 2, 4, 8});
  CHECK_NOTHROW(config(3, {1, 2, 4}).validate());
  CHECK_THROWS_AS(config(2, {1, 1}).validate(), Error);
  CHECK_THROWS_AS(config(3, {1, 2}).validate(), Error);
  CHECK_NOTHROW(config(2, {1, 1}).validate_counts());
  CHECK_THROWS_AS(config(2, {1, 0}).validate_counts(), Error);
}

TEST_CASE("telescope collapses to the fine loss on identical data") {
  const auto d = gen_sbm({60, 3, 0.15, 0.02, 0.5, 1});
  const Model m = fresh_model(d, 2);
  const double fine = fine_loss(m, d);
  IdenticalSampler sampler(d);
  CHECK(std::abs(telescopic_loss(m, sampler, config(1, {1})).loss - fine) < 1e-12);
  for (Index levels = 2; levels <= 5; ++levels) {
    CHECK(std::abs(telescopic_loss(m, sampler, config(levels, std::vector<Index>(levels, 1))).loss - fine) < 1e-10);
    CHECK(std::abs(telescopic_loss(m, sampler, config(levels, TelescopeConfig::default_samples(levels))).loss -
                   fine) < 1e-10);
  }
}

TEST_CASE("two-scale estimator matches hand arithmetic") {
  // Term 1 averages two paired differences, term 2 one coarse sample.
  std::vector<GraphData> parts;
  for (std::uint64_t s = 0; s < 5; ++s) parts.push_back(gen_sbm({10 + 2 * s, 2, 0.4, 0.1, 0.5, s}));
  const Model m = fresh_model(parts[0], 3);
  std::vector<std::vector<TermSample>> per_term(2);
  per_term[0].push_back({parts[0], parts[1]});
  per_term[0].push_back({parts[2], parts[3]});
  per_term[1].push_back({parts[4], std::nullopt});
  FixedSampler sampler(per_term);
  const auto est = telescopic_loss(m, sampler, config(2, {2, 1}));
  std::vector<double> l;
  for (const auto& p : parts) l.push_back(oracle_loss(m, p));
  const double want = 0.5 * ((l[0] - l[1]) + (l[2] - l[3])) + l[4];
  CHECK(std::abs(est.loss - want) < 1e-12);
  CHECK(est.terms.size() == 5);

  FixedSampler short_sampler(std::vector<std::vector<TermSample>>{{{parts[0], parts[1]}}, {}});
  CHECK_THROWS_WITH_AS(telescopic_loss(m, short_sampler, config(2, {2, 1})), doctest::Contains("exhausted"), Error);
}

TEST_CASE("estimator gradient is the weighted sum of independent per-term gradients") {
  std::vector<GraphData> parts;
  for (std::uint64_t s = 0; s < 3; ++s) parts.push_back(gen_sbm({12 + 3 * s, 2, 0.4, 0.1, 0.5, 10 + s}));
  const Model m = fresh_model(parts[0], 4, LayerKind::GIN);
  FixedSampler sampler(std::vector<std::vector<TermSample>>{{{parts[0], parts[1]}}, {{parts[2], std::nullopt}}});
  const auto est = telescopic_loss(m, sampler, config(2, {1, 1}));
  const auto got = backward(m, est);
  auto want = Gradients::zeros_like(m);
  const double weights[] = {1.0, -1.0, 1.0};
  for (int k = 0; k < 3; ++k) {
    const auto& p = parts[static_cast<std::size_t>(k)];
    auto fwd = forward(m, p.graph, p.features);
    want.add_scaled(backward(m, fwd.tape, nll_head(fwd.logits, p.labels, p.masks.train)), weights[k]);
  }
  for (std::size_t t = 0; t < want.tensors.size(); ++t) {
    CHECK((got.tensors[t] - want.tensors[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("shared samples give the fine gradient") {
  const auto d = gen_sbm({40, 3, 0.2, 0.02, 0.5, 6});
  const Model m = fresh_model(d, 5);
  IdenticalSampler sampler(d);
  const auto got = backward(m, telescopic_loss(m, sampler, config(2, {1, 1})));
  auto fwd = forward(m, d.graph, d.features);
  const auto want = backward(m, fwd.tape, nll_head(fwd.logits, d.labels, d.masks.train));
  for (std::size_t t = 0; t < want.tensors.size(); ++t) {
    CHECK((got.tensors[t] - want.tensors[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("subset sampler pairs each coarser sample with its parent") {
  const Index n = 200;
  auto d = gen_sbm({n, 4, 0.05, 0.01, 0.5, 7});
  d.features = Matrix::Identity(n, n);  // row identity lets us recover node ids
  TelescopeConfig cfg = config(3, {1, 2, 4});
  SubsetSampler sampler(d, cfg, 3);
  const auto ids = [](const GraphData& g) {
    std::set<Index> out;
    for (Eigen::Index i = 0; i < g.features.rows(); ++i) {
      Eigen::Index col = 0;
      g.features.row(i).maxCoeff(&col);
      out.insert(static_cast<Index>(col));
    }
    return out;
  };
  for (Index term = 1; term <= 3; ++term) {
    auto s = sampler.draw(term, 3);
    REQUIRE(s);
    CHECK(count(s->at_scale.masks.train) > 0);
    if (term < 3) {
      REQUIRE(s->coarser);
      const auto fine = ids(s->at_scale), coarse = ids(*s->coarser);
      CHECK(std::includes(fine.begin(), fine.end(), coarse.begin(), coarse.end()));
      CHECK(coarse.size() < fine.size());
    } else {
      CHECK_FALSE(s->coarser);
    }
  }
  CHECK(sampler.draw(1, 3)->at_scale.num_nodes() == 50);
}

TEST_CASE("switch epoch zero reduces to plain training") {
  const auto d = gen_sbm({90, 3, 0.15, 0.02, 0.8, 8});
  Model a = fresh_model(d, 1), b = fresh_model(d, 1);
  TrainSchedule s;
  s.epochs_per_level = {30};
  TelescopeConfig cfg;
  cfg.switch_epoch = 0;
  auto ra = train_ms_gradient(a, d, cfg, s);
  auto rb = train_single_level(b, d, s);
  CHECK(ra.log.to_csv() == rb.log.to_csv());
  CHECK(flatten_weights(a) == flatten_weights(b));
}

TEST_CASE("multiscale phase is logged at the coarsest level and is cheaper per epoch") {
  const auto d = gen_sbm({200, 3, 0.1, 0.01, 0.8, 9});
  Model a = fresh_model(d, 2), b = fresh_model(d, 2);
  TrainSchedule s;
  s.epochs_per_level = {40};
  TelescopeConfig cfg;
  cfg.switch_epoch = 20;
  auto ra = train_ms_gradient(a, d, cfg, s);
  auto rb = train_single_level(b, d, s);
  CHECK(ra.log.records.front().level == 2);
  CHECK(ra.log.records.back().level == 1);
  CHECK(ra.log.records.back().epoch == 40);
  CHECK(ra.total_flops < rb.total_flops);
}

TEST_CASE("gamma profile starts at zero and averages over draws") {
  const auto d = gen_sbm({120, 3, 0.1, 0.01, 0.5, 10});
  const Model m = fresh_model(d, 3);
  CoarsenPlan plan;
  plan.levels = 3;
  auto h = build_hierarchy(d, plan);
  const auto losses = level_losses(m, h);
  const auto gamma = gamma_profile(m, h);
  REQUIRE(gamma.size() == 3);
  CHECK(gamma[0] == 0.0);
  CHECK(gamma[2] == doctest::Approx(std::abs(losses[1] - losses[2]) / losses[1]));
  auto stats = gamma_statistics(m, d, plan, 5);
  CHECK(stats.mean.size() == 3);
  CHECK(stats.mean[0] == 0.0);
  CHECK_THROWS_AS(gamma_statistics(m, d, plan, 1), Error);
}
