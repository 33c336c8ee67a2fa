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

#ifndef MGNN_GRAPH_IO_HPP
#define MGNN_GRAPH_IO_HPP

#include <filesystem>
#include <optional>

#include "mgnn/graph.hpp"

namespace mgnn::io {

// File formats:
//   edge list  whitespace separated "u v" pairs, 0-based, one per line;
//              '#' starts a comment. Loaded graphs are symmetrized and
//              deduplicated.
//   features   CSV, header "node,f0,...,f{c-1}"
//   labels     CSV, header "node,label"
//   masks      CSV, header "node,split", split in {train,val,test}

/// Reads an edge list. When num_nodes is unset it is max index + 1.
SparseGraph read_edge_list(const std::filesystem::path& path, std::optional<Index> num_nodes = std::nullopt);
FeatureMatrix read_features(const std::filesystem::path& path);
/// num_classes defaults to max label + 1.
LabelVector read_labels(const std::filesystem::path& path, Index num_nodes, std::optional<int> num_classes = {});
SplitMasks read_masks(const std::filesystem::path& path, Index num_nodes);

void write_edge_list(const std::filesystem::path& path, const SparseGraph& g);
void write_features(const std::filesystem::path& path, const FeatureMatrix& x);
void write_labels(const std::filesystem::path& path, const LabelVector& y);
void write_masks(const std::filesystem::path& path, const SplitMasks& masks);

/// Loads all four files; features define the node count.
GraphData load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                       const std::filesystem::path& labels, const std::filesystem::path& masks);

}  // namespace mgnn::io

#endif  // MGNN_GRAPH_IO_HPP
