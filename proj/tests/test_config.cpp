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
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mgnn/config.hpp"
#include "mgnn/experiment.hpp"
#include "mgnn/graph_io.hpp"

using namespace mgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mgnn_cfg_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

const char* kSbm = R"("dataset": {"kind": "sbm", "num_nodes": 120, "blocks": 3, "p_in": 0.1, "p_out": 0.01, "seed": 2})";

std::string config_text(const std::string& mode, const std::string& extra = "") {
  return std::string("{\n  \"mode\": \"") + mode + "\",\n  \"seeds\": [0, 1, 2],\n  " + kSbm +
         ",\n  \"model\": {\"hidden\": 8},\n  \"schedule\": {\"fine_epochs\": 10, \"baseline_epochs\": 30}" + extra +
         "\n}\n";
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunOptions quiet_out(const fs::path& dir) {
  RunOptions o;
  o.out_dir = dir.string();
  return o;
}

}  // namespace

TEST_CASE("mode names round trip") {
  for (auto m : {Mode::Baseline, Mode::CoarseToFine, Mode::SubToFull, Mode::MsGrad, Mode::Theorem, Mode::Flops,
                 Mode::CoarsenInspect}) {
    CHECK(parse_mode(to_string(m)) == m);
  }
}

TEST_CASE("configs round trip through their canonical form") {
  const std::string plan = R"(, "plan": {"levels": 3, "ratio": 0.5, "power": [1, 2], "policy": "hybrid"})";
  const std::vector<std::string> texts{
      config_text("baseline"),
      config_text("coarse2fine", plan),
      config_text("sub2full", R"(, "plan": {"levels": 3, "policy": "ego", "ego_hops": [3, 1]})"),
      config_text("msgrad", R"(, "telescope": {"levels": 3, "retain_fraction": 0.5, "switch_epoch": 7})"),
      config_text("theorem", R"(, "theorem": {"trials": 3, "epsilon": 0.2})"),
      config_text("flops", plan),
      config_text("coarsen-inspect", plan + R"(, "inspect": {"train_epochs": 5})"),
      R"({"mode": "baseline", "dataset": {"kind": "qtips", "train_graphs": 3, "eval_graphs": 4, "rod_length": 5}})",
      R"({"mode": "baseline", "dataset": {"kind": "knn", "num_nodes": 50, "k": 4, "classes": 3}})",
      R"({"mode": "baseline", "dataset": {"kind": "files", "edges": "e", "features": "x", "labels": "y", "masks": "m"}})",
  };
  for (const auto& text : texts) {
    const auto c = parse_config(text);
    const auto again = parse_config(to_json(c).dump(2));
    CHECK(again == c);
    CHECK(config_hash(again) == config_hash(c));
  }
  auto a = parse_config(texts[1]), b = a;
  b.plan->ratio = 0.25;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("telescope defaults follow the schedule") {
  const auto c = parse_config(config_text("msgrad", R"(, "telescope": {"levels": 3})"));
  REQUIRE(c.telescope);
  CHECK(c.telescope->samples_per_term == std::vector<Index>{1, 2, 4});
  CHECK(c.telescope->switch_epoch == 15);
}

TEST_CASE("config errors are anchored to lines") {
  CHECK(error_of("{\n  \"mode\": \"baseline\",\n  \"sedes\": [1]\n}").find("cfg.json:3: sedes: unknown key") == 0);
  CHECK(error_of("{\n  \"mode\": \"baseline\",\n  \"seeds\": [1,]\n}").find("cfg.json:3: invalid JSON") == 0);
  CHECK(error_of("{\"mode\": \"baseline\",\n \"model\": {\n  \"hidden\": \"wide\"}}").find("cfg.json:3: model.hidden") ==
        0);
  CHECK(error_of("{\"mode\": \"warp\"}").find("cfg.json:1: mode") == 0);
  CHECK(error_of("{\n\"mode\": \"baseline\",\n\"dataset\": {\"kind\": \"sbm\",\n \"colour\": 1}}")
            .find("cfg.json:4: dataset.colour: unknown key") == 0);
  CHECK(error_of("{\"mode\": \"coarse2fine\"}").find("requires a 'plan'") != std::string::npos);
  CHECK(error_of("{\"mode\": \"baseline\", \"seeds\": []}").find("seeds must be nonempty") != std::string::npos);
  CHECK(error_of("{\"mode\": \"msgrad\"}").find("telescope") != std::string::npos);
  CHECK(error_of(config_text("sub2full", R"(, "plan": {"levels": 2, "policy": "random"})")).find("sub2full") !=
        std::string::npos);
  CHECK(error_of(config_text("coarse2fine", R"(, "plan": {"levels": 2, "policy": "nearest"})"))
            .find("coordinates") != std::string::npos);
  CHECK(error_of(config_text("msgrad", R"(, "telescope": {"levels": 2, "samples_per_term": [2, 2]})")) != "");
}

TEST_CASE("load_config resolves file paths against the config directory") {
  const auto dir = scratch("files");
  std::ofstream(dir / "c.json")
      << R"({"dataset": {"kind": "files", "edges": "e.txt", "features": "x.csv", "labels": "y.csv", "masks": "m.csv"}})";
  const auto c = load_config(dir / "c.json");
  CHECK(fs::path(c.dataset.edges) == (dir / "e.txt").lexically_normal());
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("three seeds give population statistics and per-seed artifacts") {
  const auto dir = scratch("seeds");
  std::ostringstream log;
  auto report = run_experiment(parse_config(config_text("baseline")), quiet_out(dir), log);
  const auto summary = read_json(dir / "summary.json");
  CHECK(summary == report.summary);
  const auto& acc = summary.at("final_test_acc");
  CHECK(acc.at("n") == 3);
  std::vector<double> v;
  for (const auto& r : summary.at("runs")) v.push_back(r.at("final_test_acc"));
  REQUIRE(v.size() == 3);
  const double mean = (v[0] + v[1] + v[2]) / 3.0;
  const double var = ((v[0] - mean) * (v[0] - mean) + (v[1] - mean) * (v[1] - mean) + (v[2] - mean) * (v[2] - mean)) / 3.0;
  CHECK(acc.at("mean").get<double>() == doctest::Approx(mean).epsilon(1e-14));
  CHECK(acc.at("std").get<double>() == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  for (int s = 0; s < 3; ++s) {
    CHECK(fs::exists(dir / ("metrics_seed" + std::to_string(s) + ".csv")));
    CHECK(fs::exists(dir / ("model_seed" + std::to_string(s) + ".bin")));
  }
  const auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest.at("config_hash") == config_hash(parse_config(config_text("baseline"))));
  CHECK(manifest.at("seeds").size() == 3);
  CHECK(manifest.at("versions").contains("mgnn"));
  CHECK(manifest.at("versions").contains("eigen"));
}

TEST_CASE("baseline ignores a multilevel plan with a warning") {
  const auto dir = scratch("warn");
  std::ostringstream log;
  auto report = run_experiment(parse_config(config_text("baseline", R"(, "plan": {"levels": 3})")), quiet_out(dir), log);
  REQUIRE(report.warnings.size() == 1);
  CHECK(log.str().find("warning: mode baseline ignores the plan") != std::string::npos);
}

TEST_CASE("runs are byte-identical on replay, in parallel too") {
  const std::string plan = R"(, "plan": {"levels": 3, "ratio": 0.5, "policy": "random"})";
  for (const auto& text : {config_text("coarse2fine", plan),
                           config_text("msgrad", R"(, "telescope": {"levels": 2, "switch_epoch": 15})")}) {
    const auto a = scratch("replay_a"), b = scratch("replay_b");
    std::ostringstream log;
    run_experiment(parse_config(text), quiet_out(a), log);
    RunOptions parallel = quiet_out(b);
    parallel.jobs = 3;
    run_experiment(parse_config(text), parallel, log);
    for (int s = 0; s < 3; ++s) {
      const auto name = "metrics_seed" + std::to_string(s) + ".csv";
      CHECK(slurp(a / name) == slurp(b / name));
      CHECK(!slurp(a / name).empty());
    }
  }
}

TEST_CASE("seed override and output directory precedence") {
  const auto dir = scratch("override");
  auto c = parse_config(config_text("baseline"));
  RunOptions o = quiet_out(dir);
  o.seed_override = 7;
  std::ostringstream log;
  run_experiment(c, o, log);
  CHECK(fs::exists(dir / "metrics_seed7.csv"));
  CHECK_FALSE(fs::exists(dir / "metrics_seed0.csv"));

  const auto env_dir = scratch("env");
  setenv("MGNN_OUT_DIR", env_dir.c_str(), 1);
  CHECK(resolve_out_dir(c, RunOptions{}) == env_dir);
  CHECK(resolve_out_dir(c, quiet_out(dir)) == dir);
  unsetenv("MGNN_OUT_DIR");
  CHECK(resolve_out_dir(c, RunOptions{}) == fs::path("out"));
}

TEST_CASE("inspect statistics") {
  auto c = parse_config(config_text("coarsen-inspect", R"(, "plan": {"levels": 1})"));
  const auto task = build_task(c.dataset);
  ModelSpec spec = c.model.spec(3, 3);
  Rng rng(0);
  const Model m = Model::create(spec, rng);
  const auto one = inspect_hierarchy(m, build_hierarchy(task.train, *c.plan));
  REQUIRE(one.size() == 1);
  CHECK(one[0].edge_ratio == 1.0);
  CHECK(one[0].node_ratio == 1.0);
  CHECK(one[0].delta_loss == 0.0);

  CoarsenPlan plan;
  plan.levels = 4;
  plan.ratio = 0.5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    plan.seed = seed;
    const auto stats = inspect_hierarchy(m, build_hierarchy(task.train, plan));
    for (std::size_t r = 1; r < stats.size(); ++r) CHECK(stats[r].edges < stats[r - 1].edges);
  }

  const auto dir = scratch("inspect");
  std::ostringstream log;
  run_experiment(parse_config(config_text("coarsen-inspect", R"(, "plan": {"levels": 3}, "inspect": {"train_epochs": 5})")),
                 quiet_out(dir), log);
  const auto j = read_json(dir / "inspect_seed0.json");
  CHECK(j.at("initial").size() == 3);
  CHECK(j.at("trained").size() == 3);
  CHECK(log.str().find("edge_ratio") != std::string::npos);
}

TEST_CASE("topk with power 2 narrows the initial loss gap on qtips data") {
  DatasetConfig d;
  d.kind = DatasetConfig::Kind::Qtips;
  d.qtips.num_graphs = 8;
  d.qtips.seed = 3;
  const auto task = build_task(d);
  double gap[2] = {0.0, 0.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelSpec spec;
    spec.channels = {3, 32, 32, 32, 4};
    Rng rng(seed);
    const Model m = Model::create(spec, rng);
    for (unsigned p : {1u, 2u}) {
      CoarsenPlan plan;
      plan.levels = 2;
      plan.policy = CoarsenPolicy::Topk;
      plan.power = {p};
      gap[p - 1] += inspect_hierarchy(m, build_hierarchy(task.train, plan))[1].delta_loss;
    }
  }
  MESSAGE("mean initial delta loss: p=1 " << gap[0] / 20 << ", p=2 " << gap[1] / 20);
  CHECK(gap[1] < gap[0]);
}

TEST_CASE("flops and theorem modes write their reports") {
  const auto dir = scratch("flops");
  std::ostringstream log;
  run_experiment(parse_config(config_text("flops", R"(, "plan": {"levels": 3})")), quiet_out(dir), log);
  const auto f = read_json(dir / "flops_seed0.json");
  CHECK(f.at("ratio").get<double>() < 1.0);
  CHECK(f.at("levels").size() == 3);
  std::uint64_t sum = 0;
  for (const auto& l : f.at("levels")) sum += l.at("flops").get<std::uint64_t>();
  CHECK(sum == f.at("schedule_flops").get<std::uint64_t>());

  RunOptions o = quiet_out(dir);
  o.mode = Mode::Theorem;
  o.seed_override = 4;
  run_experiment(parse_config(config_text("baseline")), o, log);
  const auto t = read_json(dir / "theorem_seed4.json");
  CHECK(t.at("trials").size() == 100);
  CHECK(t.at("max_identity_error").get<double>() < 1e-10);
}

TEST_CASE("files datasets run end to end") {
  const auto dir = scratch("filesrun");
  const auto d = gen_sbm({60, 2, 0.2, 0.02, 0.5, 1});
  io::write_edge_list(dir / "e.txt", d.graph);
  io::write_features(dir / "x.csv", d.features);
  io::write_labels(dir / "y.csv", d.labels);
  io::write_masks(dir / "m.csv", d.masks);
  std::ofstream(dir / "c.json") << R"({"mode": "baseline", "seeds": [5],
    "dataset": {"kind": "files", "edges": "e.txt", "features": "x.csv", "labels": "y.csv", "masks": "m.csv"},
    "schedule": {"baseline_epochs": 12}})";
  std::ostringstream log;
  run_experiment(load_config(dir / "c.json"), quiet_out(dir / "out"), log);
  CHECK(fs::exists(dir / "out" / "metrics_seed5.csv"));
}
