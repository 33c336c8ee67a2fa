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

#include "mgnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mgnn/error.hpp"

namespace mgnn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

const char* tensor_name(int k) {
  static const char* names[] = {"weight", "bias", "weight2", "bias2"};
  return names[k];
}

}  // namespace

std::vector<double> flatten_weights(const Model& model) {
  std::vector<double> out;
  for (const Matrix* p : model.parameters()) out.insert(out.end(), p->data(), p->data() + p->size());
  return out;
}

void save_checkpoint(const Model& model, const std::filesystem::path& stem) {
  nlohmann::json manifest;
  manifest["format"] = "mgnn-checkpoint-v1";
  manifest["dtype"] = "float64-le";
  manifest["normalize_adjacency"] = model.normalize_adjacency;
  std::size_t offset = 0;
  for (const auto& layer : model.layers) {
    nlohmann::json entry{{"kind", to_string(layer.kind)},
                         {"c_in", layer.c_in},
                         {"c_out", layer.c_out},
                         {"gin_eps", layer.gin_eps}};
    const Matrix* tensors[] = {&layer.weight, &layer.bias, &layer.weight2, &layer.bias2};
    for (int k = 0; k < 4; ++k) {
      if (tensors[k]->size() == 0) continue;
      entry["tensors"].push_back(
          {{"name", tensor_name(k)}, {"offset", offset}, {"rows", tensors[k]->rows()}, {"cols", tensors[k]->cols()}});
      offset += static_cast<std::size_t>(tensors[k]->size());
    }
    manifest["layers"].push_back(entry);
  }
  manifest["num_values"] = offset;

  auto values = flatten_weights(model);
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error("cannot write " + with_suffix(stem, ".bin").string());
  bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  std::ofstream json(with_suffix(stem, ".json"));
  if (!json) throw Error("cannot write " + with_suffix(stem, ".json").string());
  json << manifest.dump(2) << '\n';
}

Model load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream json(with_suffix(stem, ".json"));
  if (!json) throw Error("cannot open " + with_suffix(stem, ".json").string());
  nlohmann::json manifest = nlohmann::json::parse(json);
  require(manifest.value("format", "") == "mgnn-checkpoint-v1", "checkpoint: unknown format");
  const auto num_values = manifest.at("num_values").get<std::size_t>();

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary | std::ios::ate);
  if (!bin) throw Error("cannot open " + with_suffix(stem, ".bin").string());
  require(static_cast<std::size_t>(bin.tellg()) == num_values * sizeof(double), "checkpoint: binary size mismatch");
  std::vector<double> values(num_values);
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(num_values * sizeof(double)));

  Model model;
  model.normalize_adjacency = manifest.at("normalize_adjacency").get<bool>();
  for (const auto& entry : manifest.at("layers")) {
    Layer layer;
    layer.kind = parse_layer_kind(entry.at("kind").get<std::string>());
    layer.c_in = entry.at("c_in").get<Index>();
    layer.c_out = entry.at("c_out").get<Index>();
    layer.gin_eps = entry.at("gin_eps").get<double>();
    for (const auto& t : entry.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      require(offset + static_cast<std::size_t>(rows * cols) <= num_values, "checkpoint: tensor out of bounds");
      Matrix m(rows, cols);
      std::memcpy(m.data(), values.data() + offset, static_cast<std::size_t>(rows * cols) * sizeof(double));
      if (name == "weight") {
        layer.weight = std::move(m);
      } else if (name == "bias") {
        layer.bias = std::move(m);
      } else if (name == "weight2") {
        layer.weight2 = std::move(m);
      } else if (name == "bias2") {
        layer.bias2 = std::move(m);
      } else {
        throw Error("checkpoint: unknown tensor '" + name + "'");
      }
    }
    require(layer.weight.rows() == static_cast<Eigen::Index>(layer.c_in) &&
                layer.weight.cols() == static_cast<Eigen::Index>(layer.c_out),
            "checkpoint: weight shape disagrees with layer widths");
    model.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace mgnn
