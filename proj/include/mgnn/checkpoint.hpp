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

#ifndef MGNN_CHECKPOINT_HPP
#define MGNN_CHECKPOINT_HPP

#include <filesystem>
#include <vector>

#include "mgnn/engine.hpp"

namespace mgnn {

/// All parameters flattened in Model::parameters() order, row-major.
std::vector<double> flatten_weights(const Model& model);

/// Writes `<stem>.bin` (little-endian float64 values, flatten_weights
/// order, no header) and `<stem>.json`, a manifest with the layer kinds,
/// widths, GIN eps, normalization flag and the (offset, rows, cols) of each
/// tensor within the binary file.
void save_checkpoint(const Model& model, const std::filesystem::path& stem);
Model load_checkpoint(const std::filesystem::path& stem);

}  // namespace mgnn

#endif  // MGNN_CHECKPOINT_HPP
