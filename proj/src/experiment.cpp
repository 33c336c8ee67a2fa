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

#include "mgnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "mgnn/checkpoint.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/graph_io.hpp"
#include "mgnn/ms_gradient.hpp"
#include "mgnn/theory.hpp"
#include "mgnn/trainers.hpp"

#ifndef MGNN_VERSION
#define MGNN_VERSION "0.0.0"
#endif

namespace mgnn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kModelStream = 1, kPlanStream = 2, kSamplerStream = 3 };

SplitMasks split_60_20_20(Index n, Rng& rng) {
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  SplitMasks m{NodeMask(n, false), NodeMask(n, false), NodeMask(n, false)};
  const Index n_train = n * 6 / 10, n_val = n * 2 / 10;
  for (Index k = 0; k < n; ++k) {
    auto& mask = k < n_train ? m.train : (k < n_train + n_val ? m.val : m.test);
    mask[order[k]] = true;
  }
  return m;
}

GraphData knn_task(const DatasetConfig& d) {
  require(d.knn_classes >= 2, "dataset: knn needs at least 2 classes");
  auto cloud = gen_knn_cloud(d.knn_nodes, d.knn_dim, d.knn_k, d.knn_seed);
  Rng rng(derive_seed(d.knn_seed, 7));
  std::normal_distribution<double> noise(0.0, d.knn_noise);
  const Matrix& pts = cloud.coords.points();
  const Index n = cloud.graph.num_nodes();
  FeatureMatrix x(n, d.knn_dim);
  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d.knn_dim; ++c) x(i, c) = pts(i, c) + noise(rng);
    const auto bin = static_cast<Index>(std::floor(pts(i, 0) * static_cast<double>(d.knn_classes)));
    labels[i] = static_cast<int>(std::min(bin, d.knn_classes - 1));
  }
  GraphData data{std::move(cloud.graph), std::move(x), LabelVector(std::move(labels), static_cast<int>(d.knn_classes)),
                 split_60_20_20(n, rng), std::move(cloud.coords)};
  data.check_consistent();
  return data;
}

// Training masks hold every rod node plus as many randomly drawn background
// nodes; evaluation masks hold the rod nodes, split by graph into val and test.
GraphData qtips_union(const std::vector<QtipsGraph>& graphs, bool evaluation, Index val_graphs, Rng& rng) {
  std::vector<GraphData> parts;
  parts.reserve(graphs.size());
  for (Index g = 0; g < graphs.size(); ++g) {
    GraphData part = graphs[g].data;
    const auto& pos = graphs[g].rod_position;
    const Index n = part.num_nodes();
    part.masks = {NodeMask(n, false), NodeMask(n, false), NodeMask(n, false)};
    auto& mask = !evaluation ? part.masks.train : (g < val_graphs ? part.masks.val : part.masks.test);
    std::vector<Index> background;
    for (Index i = 0; i < n; ++i) {
      mask[i] = pos[i] >= 0;
      if (pos[i] < 0) background.push_back(i);
    }
    if (!evaluation) {
      const Index rods = n - background.size();
      std::vector<Index> drawn;
      std::sample(background.begin(), background.end(), std::back_inserter(drawn),
                  std::min(rods, background.size()), rng);
      for (Index i : drawn) mask[i] = true;
    }
    parts.push_back(std::move(part));
  }
  return disjoint_union(parts);
}

Task qtips_task(const DatasetConfig& d) {
  Task task;
  Rng rng(derive_seed(d.qtips.seed, 13));
  task.train = qtips_union(gen_qtips(d.qtips), false, 0, rng);
  QtipsSpec eval_spec = d.qtips;
  eval_spec.num_graphs = d.qtips_eval_graphs;
  eval_spec.seed = derive_seed(d.qtips.seed, 11);
  task.eval = qtips_union(gen_qtips(eval_spec), true, d.qtips_eval_graphs / 2, rng);
  return task;
}

std::vector<Index> level_epochs(const ExperimentConfig& c, Index levels) {
  if (!c.schedule.epochs_per_level.empty()) return c.schedule.epochs_per_level;
  return TrainSchedule::doubling(c.schedule.fine_epochs, levels);
}

TrainSchedule make_schedule(const ExperimentConfig& c, std::vector<Index> epochs, std::uint64_t seed) {
  TrainSchedule s;
  s.epochs_per_level = std::move(epochs);
  s.adam.lr = c.schedule.lr;
  s.eval_every = c.schedule.eval_every;
  s.seed = seed;
  s.record_wall_time = c.schedule.record_wall_time;
  s.validate();
  return s;
}

CoarsenPlan seeded_plan(const ExperimentConfig& c, std::uint64_t seed) {
  CoarsenPlan plan = c.plan.value_or(CoarsenPlan{});
  plan.seed = derive_seed(seed, kPlanStream);
  return plan;
}

Model init_model(const ExperimentConfig& c, const Task& task, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kModelStream));
  const auto& fine = task.train;
  return Model::create(c.model.spec(static_cast<Index>(fine.features.cols()),
                                    static_cast<Index>(fine.labels.num_classes())),
                       rng);
}

json level_stats_json(const std::vector<LevelStats>& stats) {
  json rows = json::array();
  for (const auto& s : stats) {
    rows.push_back({{"level", s.level},
                    {"nodes", s.nodes},
                    {"edges", s.edges},
                    {"train_nodes", s.train_nodes},
                    {"node_ratio", s.node_ratio},
                    {"edge_ratio", s.edge_ratio},
                    {"loss", s.loss},
                    {"delta_loss", s.delta_loss},
                    {"gamma", s.gamma}});
  }
  return rows;
}

void print_level_table(std::ostream& out, const std::vector<LevelStats>& stats) {
  out << "level  nodes  edges  edge_ratio  loss  delta_loss  gamma\n";
  for (const auto& s : stats) {
    out << s.level << "  " << s.nodes << "  " << s.edges << "  " << s.edge_ratio << "  " << s.loss << "  "
        << s.delta_loss << "  " << s.gamma << "\n";
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct SeedResult {
  std::uint64_t seed = 0;
  json record;
  std::string log;
  std::vector<std::string> artifacts;
  std::string error;
};

json train_record(const TrainResult& r, double wall_ms) {
  return {{"final_val_acc", r.final_val_acc},
          {"final_test_acc", r.final_test_acc},
          {"total_flops", r.total_flops},
          {"wall_ms", wall_ms}};
}

SeedResult run_seed(const ExperimentConfig& c, const Task& task, std::uint64_t seed, const fs::path& out) {
  SeedResult res;
  res.seed = seed;
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  const std::string tag = "_seed" + std::to_string(seed);
  const GraphData* eval = task.eval ? &*task.eval : nullptr;

  auto finish_training = [&](Model& model, const TrainResult& r) {
    const fs::path csv = out / ("metrics" + tag + ".csv");
    r.log.write_csv(csv);
    save_checkpoint(model, out / ("model" + tag));
    res.artifacts.push_back(csv.filename().string());
    res.artifacts.push_back("model" + tag + ".bin");
    res.artifacts.push_back("model" + tag + ".json");
    res.record = train_record(r, elapsed_ms());
    log << "seed " << seed << ": test_acc=" << r.final_test_acc << " val_acc=" << r.final_val_acc
        << " flops=" << r.total_flops << "\n";
  };

  switch (c.mode) {
    case Mode::Baseline: {
      Model model = init_model(c, task, seed);
      auto r = train_single_level(model, task.train, make_schedule(c, {c.schedule.baseline_epochs}, seed), eval);
      finish_training(model, r);
      break;
    }
    case Mode::CoarseToFine: {
      Model model = init_model(c, task, seed);
      const auto plan = seeded_plan(c, seed);
      const auto hierarchy = build_hierarchy(task.train, plan);
      auto r = coarse_to_fine(model, hierarchy, make_schedule(c, level_epochs(c, plan.levels), seed), eval);
      finish_training(model, r);
      break;
    }
    case Mode::SubToFull: {
      Model model = init_model(c, task, seed);
      const auto plan = seeded_plan(c, seed);
      auto r = sub_to_full(model, task.train, plan, make_schedule(c, level_epochs(c, plan.levels), seed), eval);
      finish_training(model, r);
      break;
    }
    case Mode::MsGrad: {
      Model model = init_model(c, task, seed);
      auto r = train_ms_gradient(model, task.train, *c.telescope,
                                 make_schedule(c, {c.schedule.baseline_epochs}, derive_seed(seed, kSamplerStream)),
                                 eval);
      finish_training(model, r);
      break;
    }
    case Mode::Theorem: {
      const auto report = run_theorem_trials(*c.theorem, seed);
      const fs::path path = out / ("theorem" + tag + ".json");
      write_json(path, report.to_json());
      res.artifacts.push_back(path.filename().string());
      res.record = {{"base_bound_rate", report.base_bound_rate},
                    {"factor2_bound_rate", report.factor2_bound_rate},
                    {"max_identity_error", report.max_identity_error},
                    {"wall_ms", elapsed_ms()}};
      log << "seed " << seed << ": base_bound_rate=" << report.base_bound_rate
          << " factor2_bound_rate=" << report.factor2_bound_rate
          << " max_identity_error=" << report.max_identity_error << "\n";
      break;
    }
    case Mode::Flops: {
      const Model model = init_model(c, task, seed);
      const auto plan = seeded_plan(c, seed);
      const auto hierarchy = build_hierarchy(task.train, plan);
      const auto epochs = level_epochs(c, plan.levels);
      json levels = json::array();
      std::uint64_t schedule_total = 0, fine_step = 0;
      for (Index r = 0; r < hierarchy.size(); ++r) {
        const auto& g = hierarchy.level(r).data.graph;
        std::uint64_t step = 0;
        for (const auto& layer : model.layers) step += layer_flops(layer, g.num_nodes(), g.num_undirected_edges());
        if (r == 0) fine_step = step;
        schedule_total += step * epochs.at(r);
        levels.push_back({{"level", r + 1},
                          {"nodes", g.num_nodes()},
                          {"edges", g.num_undirected_edges()},
                          {"flops_per_epoch", step},
                          {"epochs", epochs.at(r)},
                          {"flops", step * epochs.at(r)}});
      }
      const std::uint64_t baseline_total = fine_step * c.schedule.baseline_epochs;
      const double ratio = static_cast<double>(schedule_total) / static_cast<double>(baseline_total);
      const json report{{"levels", levels},
                        {"schedule_flops", schedule_total},
                        {"baseline_flops", baseline_total},
                        {"baseline_epochs", c.schedule.baseline_epochs},
                        {"ratio", ratio}};
      const fs::path path = out / ("flops" + tag + ".json");
      write_json(path, report);
      res.artifacts.push_back(path.filename().string());
      res.record = {{"schedule_flops", schedule_total}, {"baseline_flops", baseline_total}, {"ratio", ratio},
                    {"wall_ms", elapsed_ms()}};
      log << "seed " << seed << ": schedule_flops=" << schedule_total << " baseline_flops=" << baseline_total
          << " ratio=" << ratio << "\n";
      break;
    }
    case Mode::CoarsenInspect: {
      Model model = init_model(c, task, seed);
      const auto plan = seeded_plan(c, seed);
      const auto hierarchy = build_hierarchy(task.train, plan);
      const auto initial = inspect_hierarchy(model, hierarchy);
      json report{{"policy", to_string(plan.policy)}, {"initial", level_stats_json(initial)}};
      log << "seed " << seed << " (initial model)\n";
      print_level_table(log, initial);
      if (c.inspect.train_epochs > 0) {
        train_single_level(model, task.train, make_schedule(c, {c.inspect.train_epochs}, seed), eval);
        const auto trained = inspect_hierarchy(model, hierarchy);
        report["trained"] = level_stats_json(trained);
        report["train_epochs"] = c.inspect.train_epochs;
        log << "seed " << seed << " (after " << c.inspect.train_epochs << " epochs)\n";
        print_level_table(log, trained);
      }
      const fs::path path = out / ("inspect" + tag + ".json");
      write_json(path, report);
      res.artifacts.push_back(path.filename().string());
      res.record = {{"levels", hierarchy.size()}, {"wall_ms", elapsed_ms()}};
      break;
    }
  }
  res.record["seed"] = seed;
  res.log = log.str();
  return res;
}

json mean_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {{"mean", mean}, {"std", std::sqrt(var)}, {"n", values.size()}};
}

}  // namespace

Task build_task(const DatasetConfig& d) {
  switch (d.kind) {
    case DatasetConfig::Kind::Sbm: return Task{gen_sbm(d.sbm), std::nullopt};
    case DatasetConfig::Kind::Qtips: return qtips_task(d);
    case DatasetConfig::Kind::Knn: return Task{knn_task(d), std::nullopt};
    case DatasetConfig::Kind::Files: return Task{io::load_dataset(d.edges, d.features, d.labels, d.masks), std::nullopt};
  }
  throw Error("unknown dataset kind");
}

std::vector<LevelStats> inspect_hierarchy(const Model& model, const LevelHierarchy& hierarchy) {
  const auto losses = level_losses(model, hierarchy);
  const auto gammas = gamma_profile(model, hierarchy);
  const auto& fine = hierarchy.fine().graph;
  std::vector<LevelStats> out;
  for (Index r = 0; r < hierarchy.size(); ++r) {
    const auto& d = hierarchy.level(r).data;
    LevelStats s;
    s.level = r + 1;
    s.nodes = d.num_nodes();
    s.edges = d.graph.num_undirected_edges();
    s.train_nodes = count(d.masks.train);
    s.node_ratio = static_cast<double>(s.nodes) / static_cast<double>(fine.num_nodes());
    s.edge_ratio = fine.num_undirected_edges() == 0
                       ? 1.0
                       : static_cast<double>(s.edges) / static_cast<double>(fine.num_undirected_edges());
    s.loss = losses[r];
    s.delta_loss = std::abs(losses[r] - losses[0]);
    s.gamma = gammas[r];
    out.push_back(s);
  }
  return out;
}

fs::path resolve_out_dir(const ExperimentConfig& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (const char* env = std::getenv("MGNN_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

RunReport run_experiment(ExperimentConfig config, const RunOptions& options, std::ostream& log) {
  if (options.mode) config.mode = *options.mode;
  if (config.mode == Mode::Theorem && !config.theorem) config.theorem = TheoremConfig{};
  if (options.seed_override) config.seeds = {*options.seed_override};
  if (options.jobs) config.jobs = *options.jobs;
  config.validate();

  RunReport report;
  report.out_dir = resolve_out_dir(config, options);
  if (config.mode == Mode::Baseline && config.plan && config.plan->levels > 1) {
    report.warnings.push_back("mode baseline ignores the plan section (levels = " +
                              std::to_string(config.plan->levels) + ")");
  }
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";
  fs::create_directories(report.out_dir);

  std::optional<Task> task;
  if (config.mode != Mode::Theorem) task = build_task(config.dataset);
  static const Task kNoTask{};

  const auto& seeds = config.seeds;
  std::vector<SeedResult> results(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = run_seed(config, task ? *task : kNoTask, seeds[i], report.out_dir);
      } catch (const std::exception& e) {
        results[i].seed = seeds[i];
        results[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(config.jobs, seeds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& r : results) {
    if (!r.error.empty()) throw Error("seed " + std::to_string(r.seed) + ": " + r.error);
    log << r.log;
  }

  json runs = json::array();
  std::vector<std::string> artifacts;
  for (const auto& r : results) {
    runs.push_back(r.record);
    artifacts.insert(artifacts.end(), r.artifacts.begin(), r.artifacts.end());
  }
  json summary{{"mode", to_string(config.mode)}, {"seeds", seeds}, {"runs", runs}};
  auto aggregate = [&](const std::string& key) {
    if (!results.front().record.contains(key)) return;
    std::vector<double> values;
    for (const auto& r : results) values.push_back(r.record.at(key).get<double>());
    summary[key] = mean_std(values);
  };
  for (const char* key : {"final_test_acc", "final_val_acc", "total_flops", "wall_ms", "base_bound_rate",
                          "factor2_bound_rate", "ratio"}) {
    aggregate(key);
  }
  write_json(report.out_dir / "summary.json", summary);

  const json manifest{{"config_hash", config_hash(config)},
                      {"config", to_json(config)},
                      {"seeds", seeds},
                      {"mode", to_string(config.mode)},
                      {"versions",
                       {{"mgnn", MGNN_VERSION},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                        {"checkpoint_format", "mgnn-checkpoint-v1"}}},
                      {"artifacts", artifacts},
                      {"warnings", report.warnings}};
  write_json(report.out_dir / "manifest.json", manifest);
  report.summary = std::move(summary);
  return report;
}

}  // namespace mgnn
