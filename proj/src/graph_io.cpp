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

#include "mgnn/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "mgnn/error.hpp"

namespace mgnn::io {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
T parse_number(std::string_view text, const std::filesystem::path& path, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

// Reads "node,<fields...>" rows after the header; calls row(node, fields, line_no).
template <class RowFn>
void for_each_csv_row(const std::filesystem::path& path, std::string_view expected_first, RowFn&& row) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv(line);
    if (header) {
      if (fields.empty() || fields.front() != expected_first) {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": expected header starting with '" +
                    std::string(expected_first) + "'");
      }
      header = false;
      continue;
    }
    row(parse_number<Index>(fields.front(), path, line_no), fields, line_no);
  }
}

}  // namespace

SparseGraph read_edge_list(const std::filesystem::path& path, std::optional<Index> num_nodes) {
  auto in = open_in(path);
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t line_no = 0;
  Index max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected exactly two node indices");
    }
    Index u = parse_number<Index>(a, path, line_no);
    Index v = parse_number<Index>(b, path, line_no);
    max_index = std::max({max_index, u, v});
    edges.emplace_back(u, v);
  }
  Index n = num_nodes.value_or(edges.empty() ? 0 : max_index + 1);
  return SparseGraph::from_edges(n, edges);
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for_each_csv_row(path, "node", [&](Index node, const auto& fields, std::size_t line_no) {
    if (rows.empty()) width = fields.size() - 1;
    if (fields.size() - 1 != width) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    if (node != rows.size()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": nodes must be listed in order 0..n-1");
    }
    std::vector<double> values;
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(parse_number<double>(fields[k], path, line_no));
    rows.push_back(std::move(values));
  });
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < width; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  require(x.allFinite(), path.string() + ": non-finite feature value");
  return x;
}

LabelVector read_labels(const std::filesystem::path& path, Index num_nodes, std::optional<int> num_classes) {
  std::vector<int> labels(num_nodes, -1);
  for_each_csv_row(path, "node", [&](Index node, const auto& fields, std::size_t line_no) {
    if (fields.size() != 2 || node >= num_nodes) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": bad label row");
    }
    labels[node] = parse_number<int>(fields[1], path, line_no);
  });
  require(std::find(labels.begin(), labels.end(), -1) == labels.end(), path.string() + ": missing node labels");
  int k = num_classes.value_or(labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1);
  return LabelVector(std::move(labels), k);
}

SplitMasks read_masks(const std::filesystem::path& path, Index num_nodes) {
  SplitMasks masks{NodeMask(num_nodes, false), NodeMask(num_nodes, false), NodeMask(num_nodes, false)};
  for_each_csv_row(path, "node", [&](Index node, const auto& fields, std::size_t line_no) {
    if (fields.size() != 2 || node >= num_nodes) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": bad mask row");
    }
    if (fields[1] == "train") {
      masks.train[node] = true;
    } else if (fields[1] == "val") {
      masks.val[node] = true;
    } else if (fields[1] == "test") {
      masks.test[node] = true;
    } else {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": unknown split '" + std::string(fields[1]) + "'");
    }
  });
  return masks;
}

void write_edge_list(const std::filesystem::path& path, const SparseGraph& g) {
  auto out = open_out(path);
  for (auto [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& x) {
  auto out = open_out(path);
  out << "node";
  for (Eigen::Index k = 0; k < x.cols(); ++k) out << ",f" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < x.cols(); ++k) out << ',' << x(i, k);
    out << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const LabelVector& y) {
  auto out = open_out(path);
  out << "node,label\n";
  for (Index i = 0; i < y.size(); ++i) out << i << ',' << y[i] << '\n';
}

void write_masks(const std::filesystem::path& path, const SplitMasks& masks) {
  auto out = open_out(path);
  out << "node,split\n";
  for (Index i = 0; i < masks.train.size(); ++i) {
    if (masks.train[i]) out << i << ",train\n";
    if (masks.val[i]) out << i << ",val\n";
    if (masks.test[i]) out << i << ",test\n";
  }
}

GraphData load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                       const std::filesystem::path& labels, const std::filesystem::path& masks) {
  GraphData data;
  data.features = read_features(features);
  const auto n = static_cast<Index>(data.features.rows());
  data.graph = read_edge_list(edges, n);
  data.labels = read_labels(labels, n);
  data.masks = read_masks(masks, n);
  data.check_consistent();
  return data;
}

}  // namespace mgnn::io
