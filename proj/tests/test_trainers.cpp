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

#include <set>

#include "mgnn/checkpoint.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/error.hpp"
#include "mgnn/trainers.hpp"
#include "oracles.hpp"

using namespace mgnn;

namespace {

using Edges = std::vector<std::pair<Index, Index>>;

Model fresh_model(const GraphData& d, Index hidden, std::uint64_t seed) {
  ModelSpec spec;
  spec.channels = {static_cast<Index>(d.features.cols()), hidden, static_cast<Index>(d.labels.num_classes())};
  Rng rng(seed);
  return Model::create(spec, rng);
}

TrainSchedule schedule_of(std::vector<Index> epochs, std::uint64_t seed = 0) {
  TrainSchedule s;
  s.epochs_per_level = std::move(epochs);
  s.seed = seed;
  return s;
}

GraphData sbm(std::uint64_t seed) { return gen_sbm({150, 3, 0.1, 0.01, 0.8, seed}); }

}  // namespace

TEST_CASE("schedule validation and doubling") {
  CHECK_THROWS_AS(schedule_of({0}).validate(), Error);
  CHECK_THROWS_AS(schedule_of({}).validate(), Error);
  CHECK(TrainSchedule::doubling(600, 4) == std::vector<Index>{600, 1200, 2400, 4800});
  CHECK(schedule_of({600, 1200, 2400, 4800}).total_epochs() == 9000);
}

TEST_CASE("frozen seed reproduces the run exactly") {
  const auto d = sbm(1);
  Model a = fresh_model(d, 16, 5), b = fresh_model(d, 16, 5);
  auto ra = train_single_level(a, d, schedule_of({40}));
  auto rb = train_single_level(b, d, schedule_of({40}));
  CHECK(ra.log.records == rb.log.records);
  CHECK(ra.log.to_csv() == rb.log.to_csv());
  CHECK(flatten_weights(a) == flatten_weights(b));
}

TEST_CASE("separable two-class SBM is fitted within 200 epochs") {
  const auto d = gen_sbm({80, 2, 0.3, 0.0, 0.1, 2});
  Model m = fresh_model(d, 16, 0);
  train_single_level(m, d, schedule_of({200}));
  CHECK(evaluate(m, d, d.masks.train) == 1.0);
}

TEST_CASE("metric log layout") {
  const auto d = sbm(2);
  Model m = fresh_model(d, 8, 0);
  auto s = schedule_of({25});
  s.eval_every = 10;
  auto r = train_single_level(m, d, s);
  REQUIRE(r.log.records.size() == 3);  // epochs 10, 20 and the final 25
  CHECK(r.log.records.back().epoch == 25);
  CHECK(r.log.records.back().cum_flops == r.total_flops);
  CHECK(r.log.records.back().wall_ms == 0.0);
  const std::string csv = r.log.to_csv();
  CHECK(csv.rfind("level,epoch,train_loss,val_acc,test_acc,cum_flops,wall_ms\n", 0) == 0);
  CHECK(r.final_test_acc == r.log.records.back().test_acc);
  const auto flops_per_epoch = r.total_flops / 25;
  CHECK(r.total_flops == 25 * flops_per_epoch);
}

TEST_CASE("coarse_to_fine with one level equals single-level training") {
  const auto d = sbm(3);
  CoarsenPlan plan;
  auto h = build_hierarchy(d, plan);
  Model a = fresh_model(d, 16, 7), b = fresh_model(d, 16, 7);
  auto ra = coarse_to_fine(a, h, schedule_of({30}));
  auto rb = train_single_level(b, d, schedule_of({30}));
  CHECK(ra.log.to_csv() == rb.log.to_csv());
  CHECK(flatten_weights(a) == flatten_weights(b));
}

TEST_CASE("coarse_to_fine carries weights and shapes across levels") {
  const auto d = sbm(4);
  CoarsenPlan plan;
  plan.levels = 3;
  plan.seed = 2;
  auto h = build_hierarchy(d, plan);
  Model m = fresh_model(d, 16, 1);
  std::vector<double> at_end;
  std::vector<Index> order;
  std::vector<std::pair<Index, Index>> shape0;
  const auto shapes = [](const Model& mm) {
    std::vector<std::pair<Index, Index>> s;
    for (const Matrix* p : mm.parameters()) s.emplace_back(p->rows(), p->cols());
    return s;
  };
  shape0 = shapes(m);
  TrainHooks hooks;
  hooks.on_level_start = [&](Index level, const Model& mm) {
    order.push_back(level);
    if (!at_end.empty()) CHECK(flatten_weights(mm) == at_end);
    CHECK(shapes(mm) == shape0);
  };
  hooks.on_level_end = [&](Index, const Model& mm) {
    at_end = flatten_weights(mm);
    CHECK(shapes(mm) == shape0);
  };
  auto r = coarse_to_fine(m, h, schedule_of({20, 40, 80}), nullptr, hooks);
  CHECK(order == std::vector<Index>{3, 2, 1});
  CHECK(r.log.records.front().level == 3);
  CHECK(r.log.records.back().level == 1);
  CHECK(r.log.records.back().epoch == 140);
  CHECK_THROWS_AS(coarse_to_fine(m, h, schedule_of({20, 40})), Error);
}

TEST_CASE("coarse_to_fine with a doubling schedule costs less than the baseline budget") {
  const auto d = sbm(5);
  CoarsenPlan plan;
  plan.levels = 3;
  auto h = build_hierarchy(d, plan);
  Model a = fresh_model(d, 16, 0), b = fresh_model(d, 16, 0);
  auto c2f = coarse_to_fine(a, h, schedule_of(TrainSchedule::doubling(50, 3)));
  auto base = train_single_level(b, d, schedule_of({250}));
  CHECK(c2f.total_flops < base.total_flops);
}

TEST_CASE("sub_to_full with saturating hops repeats full-graph training") {
  std::vector<int> y(12);
  for (Index i = 0; i < 12; ++i) y[i] = i < 6 ? 0 : 1;
  Edges e;
  for (Index i = 0; i + 1 < 12; ++i) e.emplace_back(i, i + 1);
  Matrix x(12, 2);
  for (Index i = 0; i < 12; ++i) x.row(static_cast<Eigen::Index>(i)) << (i < 6 ? 1.0 : 0.0), 0.5;
  GraphData d{SparseGraph::from_edges(12, e), x, LabelVector(y, 2), SplitMasks::all_train(12), std::nullopt};
  CoarsenPlan plan;
  plan.levels = 3;
  plan.policy = CoarsenPolicy::Ego;
  plan.ego_hops = {50};
  Model a = fresh_model(d, 8, 3), b = fresh_model(d, 8, 3);
  auto rs = sub_to_full(a, d, plan, schedule_of({10, 10, 10}));
  auto rf = train_single_level(b, d, schedule_of({30}));
  CHECK(flatten_weights(a) == flatten_weights(b));
  CHECK(rs.total_flops == rf.total_flops);

  plan.policy = CoarsenPolicy::Random;
  CHECK_THROWS_AS(sub_to_full(a, d, plan, schedule_of({10, 10, 10})), Error);
}

TEST_CASE("sub_to_full on a star trains level 2 on a 1-hop ego network") {
  Edges e;
  for (Index i = 1; i <= 6; ++i) e.emplace_back(0, i);
  std::vector<int> y{0, 1, 0, 1, 0, 1, 0};
  GraphData d{SparseGraph::from_edges(7, e), Matrix::Identity(7, 7), LabelVector(y, 2), SplitMasks::all_train(7),
              std::nullopt};
  CoarsenPlan plan;
  plan.levels = 2;
  plan.policy = CoarsenPolicy::Ego;
  plan.ego_hops = {1};
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    plan.seed = seed;
    auto h = build_hierarchy(d, plan);
    const auto& sel = h.level(1).to_root.indices();
    const std::set<Index> got(sel.begin(), sel.end());
    CHECK(got.count(0) == 1);
    CHECK((got.size() == 7 || got.size() == 2));
    Model m = fresh_model(d, 4, seed);
    auto r = sub_to_full(m, d, plan, schedule_of({5, 5}));
    CHECK(r.log.records.front().level == 2);
  }
}
