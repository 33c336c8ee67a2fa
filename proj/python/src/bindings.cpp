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

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mgnn/coarsening.hpp"
#include "mgnn/config.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/engine.hpp"
#include "mgnn/experiment.hpp"
#include "mgnn/graph.hpp"
#include "mgnn/ms_gradient.hpp"
#include "mgnn/theory.hpp"

namespace py = pybind11;

namespace {

std::vector<mgnn::Index> to_indices(const std::vector<int>& v) {
  std::vector<mgnn::Index> out;
  out.reserve(v.size());
  for (int x : v) {
    if (x < 0) throw mgnn::Error("labels must be nonnegative");
    out.push_back(static_cast<mgnn::Index>(x));
  }
  return out;
}

std::vector<int> labels_of(const mgnn::LabelVector& y) {
  std::vector<int> out(y.size());
  for (mgnn::Index i = 0; i < y.size(); ++i) out[i] = y[i];
  return out;
}

py::dict data_to_dict(const mgnn::GraphData& d) {
  py::dict out;
  out["graph"] = d.graph;
  out["features"] = d.features;
  out["labels"] = labels_of(d.labels);
  out["num_classes"] = d.labels.num_classes();
  out["train"] = d.masks.train;
  out["val"] = d.masks.val;
  out["test"] = d.masks.test;
  if (d.coords) out["coords"] = d.coords->points();
  return out;
}

std::string json_text(const nlohmann::json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "mgnn core bindings";
  m.attr("__version__") = MGNN_VERSION;

  auto error = py::register_exception<mgnn::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mgnn::ConfigError>(m, "ConfigError", error.ptr());

  py::class_<mgnn::SparseGraph>(m, "SparseGraph")
      .def_static(
          "from_edges",
          [](mgnn::Index n, const std::vector<std::pair<mgnn::Index, mgnn::Index>>& edges) {
            return mgnn::SparseGraph::from_edges(n, edges);
          },
          py::arg("num_nodes"), py::arg("edges"))
      .def_property_readonly("num_nodes", &mgnn::SparseGraph::num_nodes)
      .def_property_readonly("num_edges", &mgnn::SparseGraph::num_edges)
      .def_property_readonly("num_undirected_edges", &mgnn::SparseGraph::num_undirected_edges)
      .def("neighbors",
           [](const mgnn::SparseGraph& g, mgnn::Index v) {
             auto nb = g.neighbors(v);
             return std::vector<mgnn::Index>(nb.begin(), nb.end());
           })
      .def("degree", &mgnn::SparseGraph::degree)
      .def("has_edge", &mgnn::SparseGraph::has_edge)
      .def("edge_list", &mgnn::SparseGraph::edge_list)
      .def("__eq__", [](const mgnn::SparseGraph& a, const mgnn::SparseGraph& b) { return a == b; })
      .def("__repr__", [](const mgnn::SparseGraph& g) {
        std::ostringstream s;
        s << "SparseGraph(num_nodes=" << g.num_nodes() << ", num_undirected_edges=" << g.num_undirected_edges()
          << ")";
        return s.str();
      });

  m.def("graph_power", &mgnn::graph_power, py::arg("graph"), py::arg("p"),
        py::arg("edge_budget") = mgnn::kDefaultEdgeBudget);
  m.def(
      "induced_subgraph",
      [](const mgnn::SparseGraph& g, std::vector<mgnn::Index> sel) {
        return mgnn::induced_subgraph(g, mgnn::NodeSelection::from_unsorted(std::move(sel)));
      },
      py::arg("graph"), py::arg("selection"));
  m.def("gcn_layer_flops", &mgnn::gcn_layer_flops, py::arg("undirected_edges"), py::arg("num_nodes"),
        py::arg("c_in"), py::arg("c_out"));

  m.def(
      "gen_sbm",
      [](mgnn::Index n, mgnn::Index blocks, double p_in, double p_out, double noise, std::uint64_t seed) {
        return data_to_dict(mgnn::gen_sbm({n, blocks, p_in, p_out, noise, seed}));
      },
      py::arg("num_nodes"), py::arg("blocks"), py::arg("p_in"), py::arg("p_out"), py::arg("feature_noise") = 0.5,
      py::arg("seed") = 0);
  m.def(
      "gen_knn_cloud",
      [](mgnn::Index n, mgnn::Index dim, mgnn::Index k, std::uint64_t seed) {
        auto cloud = mgnn::gen_knn_cloud(n, dim, k, seed);
        return py::make_tuple(cloud.graph, cloud.coords.points());
      },
      py::arg("num_nodes"), py::arg("dim"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "gen_qtips",
      [](mgnn::Index num_graphs, mgnn::Index grid_side, mgnn::Index rod_length, mgnn::Index rods_per_graph,
         mgnn::Index knn_k, std::uint64_t seed) {
        mgnn::QtipsSpec spec;
        spec.num_graphs = num_graphs;
        spec.grid_side = grid_side;
        spec.rod_length = rod_length;
        spec.rods_per_graph = rods_per_graph;
        spec.knn_k = knn_k;
        spec.seed = seed;
        py::list out;
        for (const auto& g : mgnn::gen_qtips(spec)) {
          auto d = data_to_dict(g.data);
          d["rod_position"] = g.rod_position;
          out.append(d);
        }
        return out;
      },
      py::arg("num_graphs") = 1, py::arg("grid_side") = 16, py::arg("rod_length") = 7, py::arg("rods_per_graph") = 4,
      py::arg("knn_k") = 4, py::arg("seed") = 0);

  m.def(
      "model_logits",
      [](const mgnn::SparseGraph& g, const mgnn::Matrix& x, const std::vector<mgnn::Index>& channels,
         const std::string& kind, std::uint64_t seed) {
        mgnn::ModelSpec spec;
        spec.kind = mgnn::parse_layer_kind(kind);
        spec.channels = channels;
        mgnn::Rng rng(seed);
        const auto model = mgnn::Model::create(spec, rng);
        return mgnn::forward(model, g, x).logits;
      },
      py::arg("graph"), py::arg("features"), py::arg("channels"), py::arg("kind") = "gcn", py::arg("seed") = 0,
      "Logits of a freshly initialized model.");

  m.def(
      "telescope_gap",
      [](mgnn::Index n, mgnn::Index levels, std::uint64_t seed) {
        auto data = mgnn::gen_sbm({n, 4, 0.1, 0.02, 0.5, seed});
        mgnn::ModelSpec spec;
        spec.channels = {static_cast<mgnn::Index>(data.features.cols()), 8, 4};
        mgnn::Rng rng(seed);
        const auto model = mgnn::Model::create(spec, rng);
        mgnn::TelescopeConfig cfg;
        cfg.levels = levels;
        cfg.samples_per_term = mgnn::TelescopeConfig::default_samples(levels);
        mgnn::IdenticalSampler sampler(data);
        const double tele = mgnn::telescopic_loss(model, sampler, cfg).loss;
        const double fine = mgnn::nll_loss(mgnn::forward(model, data.graph, data.features).logits, data.labels,
                                           data.masks.train);
        return std::abs(tele - fine);
      },
      py::arg("num_nodes") = 64, py::arg("levels") = 3, py::arg("seed") = 0,
      "|telescopic loss - fine loss| with every term on the same data.");

  m.def(
      "theorem_trials",
      [](mgnn::Index trials, std::uint64_t seed) {
        mgnn::TheoremConfig cfg;
        cfg.trials = trials;
        return json_text(mgnn::run_theorem_trials(cfg, seed).to_json());
      },
      py::arg("trials") = 10, py::arg("seed") = 0, "Theorem harness report as a JSON string.");

  m.def(
      "config_hash", [](const std::string& text) { return mgnn::config_hash(mgnn::parse_config(text)); },
      py::arg("config_text"));
  m.def(
      "normalize_config", [](const std::string& text) { return json_text(mgnn::to_json(mgnn::parse_config(text))); },
      py::arg("config_text"), "Canonical JSON form of a config.");
  m.def(
      "run",
      [](const std::filesystem::path& config, const std::filesystem::path& out) {
        auto c = mgnn::load_config(config);
        mgnn::RunOptions options;
        options.out_dir = out.string();
        std::ostringstream log;
        py::gil_scoped_release release;
        return json_text(mgnn::run_experiment(std::move(c), options, log).summary);
      },
      py::arg("config"), py::arg("out"), "Runs an experiment config; returns summary JSON.");
}
