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

#include "mgnn/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mgnn {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::CoarseToFine: return "coarse2fine";
    case Mode::SubToFull: return "sub2full";
    case Mode::MsGrad: return "msgrad";
    case Mode::Theorem: return "theorem";
    case Mode::Flops: return "flops";
    case Mode::CoarsenInspect: return "coarsen-inspect";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  for (auto m : {Mode::Baseline, Mode::CoarseToFine, Mode::SubToFull, Mode::MsGrad, Mode::Theorem, Mode::Flops,
                 Mode::CoarsenInspect}) {
    if (to_string(m) == name) return m;
  }
  throw Error("unknown mode '" + name + "'");
}

ModelSpec ModelConfig::spec(Index input_channels, Index classes) const {
  ModelSpec s;
  s.kind = kind;
  s.normalize_adjacency = normalize_adjacency;
  s.bias = bias;
  s.gin_eps = gin_eps;
  s.channels.push_back(input_channels);
  for (Index l = 1; l < layers; ++l) s.channels.push_back(hidden);
  s.channels.push_back(classes);
  return s;
}

namespace {

const char* kind_name(DatasetConfig::Kind kind) {
  switch (kind) {
    case DatasetConfig::Kind::Sbm: return "sbm";
    case DatasetConfig::Kind::Qtips: return "qtips";
    case DatasetConfig::Kind::Knn: return "knn";
    case DatasetConfig::Kind::Files: return "files";
  }
  return "?";
}

struct Source {
  const std::string& text;
  const std::string& name;

  // Line of the last path segment, searching each segment after the previous one.
  std::size_t line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      auto found = text.find("\"" + key + "\"", pos);
      if (found == std::string::npos) break;
      pos = found;
    }
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    std::string dotted;
    for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
    throw ConfigError(name + ":" + std::to_string(line_of(path)) + ": " + (dotted.empty() ? "" : dotted + ": ") +
                      message);
  }
};

// Reads keys of one JSON object, tracking which ones were consumed.
class Section {
 public:
  Section(const json& j, std::vector<std::string> path, const Source& src)
      : j_(j), path_(std::move(path)), src_(src) {
    if (!j_.is_object()) src_.fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      src_.fail(sub(key), std::string("wrong type: ") + e.what());
    }
  }

  template <class T, class Parse>
  void read_enum(const std::string& key, T& out, Parse parse) {
    std::string name;
    read(key, name);
    if (name.empty()) return;
    try {
      out = parse(name);
    } catch (const Error& e) {
      src_.fail(sub(key), e.what());
    }
  }

  const json& raw(const std::string& key) const { return j_.at(key); }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), sub(key), src_);
  }

  /// Rejects keys nobody asked for; typos otherwise pass silently.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) src_.fail(sub(it.key()), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const { src_.fail(sub(key), message); }
  std::vector<std::string> sub(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

 private:
  const json& j_;
  std::vector<std::string> path_;
  const Source& src_;
  std::set<std::string> used_;
};

DatasetConfig read_dataset(Section s) {
  DatasetConfig d;
  std::string kind = "sbm";
  s.read("kind", kind);
  if (kind == "sbm") {
    d.kind = DatasetConfig::Kind::Sbm;
    s.read("num_nodes", d.sbm.num_nodes);
    s.read("blocks", d.sbm.blocks);
    s.read("p_in", d.sbm.p_in);
    s.read("p_out", d.sbm.p_out);
    s.read("feature_noise", d.sbm.feature_noise);
    s.read("seed", d.sbm.seed);
  } else if (kind == "qtips") {
    d.kind = DatasetConfig::Kind::Qtips;
    s.read("train_graphs", d.qtips.num_graphs);
    s.read("eval_graphs", d.qtips_eval_graphs);
    s.read("grid_side", d.qtips.grid_side);
    s.read("rod_length", d.qtips.rod_length);
    s.read("rods_per_graph", d.qtips.rods_per_graph);
    s.read("knn_k", d.qtips.knn_k);
    s.read("jitter", d.qtips.jitter);
    s.read("seed", d.qtips.seed);
    try {
      d.qtips.validate();
    } catch (const Error& e) {
      s.fail("rod_length", e.what());
    }
    if (d.qtips_eval_graphs < 2) s.fail("eval_graphs", "need at least 2 evaluation graphs");
  } else if (kind == "knn") {
    d.kind = DatasetConfig::Kind::Knn;
    s.read("num_nodes", d.knn_nodes);
    s.read("dim", d.knn_dim);
    s.read("k", d.knn_k);
    s.read("classes", d.knn_classes);
    s.read("noise", d.knn_noise);
    s.read("seed", d.knn_seed);
  } else if (kind == "files") {
    d.kind = DatasetConfig::Kind::Files;
    for (auto [key, field] : {std::pair{"edges", &d.edges}, {"features", &d.features}, {"labels", &d.labels},
                              {"masks", &d.masks}}) {
      if (!s.has(key)) s.fail(key, "required for kind 'files'");
      s.read(key, *field);
    }
  } else {
    s.fail("kind", "unknown dataset kind '" + kind + "' (expected sbm|qtips|knn|files)");
  }
  s.finish();
  return d;
}

CoarsenPlan read_plan(Section s) {
  CoarsenPlan p;
  s.read("levels", p.levels);
  s.read("ratio", p.ratio);
  if (s.has("power") && s.raw("power").is_number()) {
    unsigned single = 1;
    s.read("power", single);
    p.power = {single};
  } else {
    s.read("power", p.power);
  }
  s.read_enum("policy", p.policy, parse_policy);
  s.read("ego_hops", p.ego_hops);
  s.read_enum("hybrid_subgraph", p.hybrid_subgraph, parse_policy);
  s.read("max_retries", p.max_retries);
  s.read("edge_budget", p.edge_budget);
  try {
    p.validate();
  } catch (const Error& e) {
    s.fail("levels", e.what());
  }
  s.finish();
  return p;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!seeds.empty(), "config: seeds must be nonempty");
  require(jobs >= 1, "config: jobs must be >= 1");
  require(model.layers >= 1 && model.hidden >= 1, "config: model needs >= 1 layer and hidden >= 1");
  const bool needs_plan = mode == Mode::CoarseToFine || mode == Mode::SubToFull || mode == Mode::CoarsenInspect ||
                          mode == Mode::Flops;
  if (needs_plan) require(plan.has_value(), "config: mode " + to_string(mode) + " requires a 'plan' section");
  if (mode == Mode::SubToFull) {
    require(plan->is_subgraph_based(), "config: sub2full needs plan.policy ego or nearest");
  }
  if (plan) {
    plan->validate();
    if (!schedule.epochs_per_level.empty() && needs_plan) {
      require(schedule.epochs_per_level.size() == plan->levels,
              "config: schedule.epochs_per_level must have plan.levels entries");
    }
    const bool has_coords = dataset.kind == DatasetConfig::Kind::Qtips || dataset.kind == DatasetConfig::Kind::Knn;
    const bool uses_nearest = plan->policy == CoarsenPolicy::NearestGeometric ||
                              (plan->policy == CoarsenPolicy::Hybrid &&
                               plan->hybrid_subgraph == CoarsenPolicy::NearestGeometric);
    require(!uses_nearest || has_coords, "config: nearest policy needs a dataset with coordinates (qtips|knn)");
  }
  if (mode == Mode::MsGrad) {
    require(telescope.has_value(), "config: msgrad requires a 'telescope' section");
    telescope->validate();
  }
  if (mode == Mode::Theorem) require(theorem.has_value(), "config: theorem requires a 'theorem' section");
  require(schedule.fine_epochs >= 1 && schedule.baseline_epochs >= 1, "config: epoch budgets must be >= 1");
  for (Index e : schedule.epochs_per_level) require(e >= 1, "config: every level needs at least one epoch");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const Source src{text, source};
  Section top(root, {}, src);
  ExperimentConfig c;
  top.read_enum("mode", c.mode, parse_mode);
  top.read("seeds", c.seeds);
  top.read("output_dir", c.output_dir);
  top.read("jobs", c.jobs);
  if (top.has("dataset")) c.dataset = read_dataset(top.child("dataset"));
  if (top.has("model")) {
    Section m = top.child("model");
    m.read_enum("kind", c.model.kind, parse_layer_kind);
    m.read("hidden", c.model.hidden);
    m.read("layers", c.model.layers);
    m.read("normalize_adjacency", c.model.normalize_adjacency);
    m.read("bias", c.model.bias);
    m.read("gin_eps", c.model.gin_eps);
    m.finish();
  }
  if (top.has("plan")) c.plan = read_plan(top.child("plan"));
  if (top.has("schedule")) {
    Section s = top.child("schedule");
    s.read("fine_epochs", c.schedule.fine_epochs);
    s.read("epochs_per_level", c.schedule.epochs_per_level);
    s.read("baseline_epochs", c.schedule.baseline_epochs);
    s.read("lr", c.schedule.lr);
    s.read("eval_every", c.schedule.eval_every);
    s.read("record_wall_time", c.schedule.record_wall_time);
    s.finish();
  }
  if (top.has("telescope")) {
    Section s = top.child("telescope");
    TelescopeConfig t;
    s.read("levels", t.levels);
    t.samples_per_term = TelescopeConfig::default_samples(t.levels);
    s.read("samples_per_term", t.samples_per_term);
    s.read("retain_fraction", t.retain_fraction);
    s.read("sample_fraction", t.sample_fraction);
    t.switch_epoch = c.schedule.baseline_epochs / 2;
    s.read("switch_epoch", t.switch_epoch);
    try {
      t.validate();
    } catch (const Error& e) {
      s.fail("samples_per_term", e.what());
    }
    s.finish();
    c.telescope = t;
  }
  if (top.has("theorem")) {
    Section s = top.child("theorem");
    TheoremConfig t;
    s.read("trials", t.trials);
    s.read("num_nodes", t.num_nodes);
    s.read("blocks", t.blocks);
    s.read("p_in", t.p_in);
    s.read("p_out", t.p_out);
    s.read("feature_noise", t.feature_noise);
    s.read("coarse_size", t.coarse_size);
    s.read("epsilon", t.epsilon);
    s.finish();
    c.theorem = t;
  }
  if (top.has("inspect")) {
    Section s = top.child("inspect");
    s.read("train_epochs", c.inspect.train_epochs);
    s.finish();
  }
  top.finish();
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(source + ":1: " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ":0: cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = parse_config(buf.str(), path.string());
  if (c.dataset.kind == DatasetConfig::Kind::Files) {
    const auto base = path.parent_path();
    for (auto* f : {&c.dataset.edges, &c.dataset.features, &c.dataset.labels, &c.dataset.masks}) {
      std::filesystem::path p(*f);
      if (p.is_relative()) *f = (base / p).lexically_normal().string();
    }
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  const auto& d = c.dataset;
  json ds{{"kind", kind_name(d.kind)}};
  switch (d.kind) {
    case DatasetConfig::Kind::Sbm:
      ds.update({{"num_nodes", d.sbm.num_nodes},
                 {"blocks", d.sbm.blocks},
                 {"p_in", d.sbm.p_in},
                 {"p_out", d.sbm.p_out},
                 {"feature_noise", d.sbm.feature_noise},
                 {"seed", d.sbm.seed}});
      break;
    case DatasetConfig::Kind::Qtips:
      ds.update({{"train_graphs", d.qtips.num_graphs},
                 {"eval_graphs", d.qtips_eval_graphs},
                 {"grid_side", d.qtips.grid_side},
                 {"rod_length", d.qtips.rod_length},
                 {"rods_per_graph", d.qtips.rods_per_graph},
                 {"knn_k", d.qtips.knn_k},
                 {"jitter", d.qtips.jitter},
                 {"seed", d.qtips.seed}});
      break;
    case DatasetConfig::Kind::Knn:
      ds.update({{"num_nodes", d.knn_nodes},
                 {"dim", d.knn_dim},
                 {"k", d.knn_k},
                 {"classes", d.knn_classes},
                 {"noise", d.knn_noise},
                 {"seed", d.knn_seed}});
      break;
    case DatasetConfig::Kind::Files:
      ds.update({{"edges", d.edges}, {"features", d.features}, {"labels", d.labels}, {"masks", d.masks}});
      break;
  }
  j["dataset"] = ds;
  j["model"] = {{"kind", to_string(c.model.kind)},
                {"hidden", c.model.hidden},
                {"layers", c.model.layers},
                {"normalize_adjacency", c.model.normalize_adjacency},
                {"bias", c.model.bias},
                {"gin_eps", c.model.gin_eps}};
  if (c.plan) {
    const auto& p = *c.plan;
    j["plan"] = {{"levels", p.levels},
                 {"ratio", p.ratio},
                 {"power", p.power},
                 {"policy", to_string(p.policy)},
                 {"ego_hops", p.ego_hops},
                 {"hybrid_subgraph", to_string(p.hybrid_subgraph)},
                 {"max_retries", p.max_retries},
                 {"edge_budget", p.edge_budget}};
  }
  j["schedule"] = {{"fine_epochs", c.schedule.fine_epochs},
                   {"epochs_per_level", c.schedule.epochs_per_level},
                   {"baseline_epochs", c.schedule.baseline_epochs},
                   {"lr", c.schedule.lr},
                   {"eval_every", c.schedule.eval_every},
                   {"record_wall_time", c.schedule.record_wall_time}};
  if (c.telescope) {
    const auto& t = *c.telescope;
    j["telescope"] = {{"levels", t.levels},
                      {"samples_per_term", t.samples_per_term},
                      {"retain_fraction", t.retain_fraction},
                      {"sample_fraction", t.sample_fraction},
                      {"switch_epoch", t.switch_epoch}};
  }
  if (c.theorem) {
    const auto& t = *c.theorem;
    j["theorem"] = {{"trials", t.trials},         {"num_nodes", t.num_nodes}, {"blocks", t.blocks},
                    {"p_in", t.p_in},             {"p_out", t.p_out},         {"feature_noise", t.feature_noise},
                    {"coarse_size", t.coarse_size}, {"epsilon", t.epsilon}};
  }
  j["inspect"] = {{"train_epochs", c.inspect.train_epochs}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mgnn
