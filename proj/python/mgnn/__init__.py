# Copyright 2026 The mgnn Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the mgnn multiscale GNN engine."""

from ._core import (
    ConfigError,
    Error,
    SparseGraph,
    __version__,
    config_hash,
    gcn_layer_flops,
    gen_knn_cloud,
    gen_qtips,
    gen_sbm,
    graph_power,
    induced_subgraph,
    model_logits,
    normalize_config,
    run,
    telescope_gap,
    theorem_trials,
)

__all__ = [
    "ConfigError",
    "Error",
    "SparseGraph",
    "__version__",
    "config_hash",
    "gcn_layer_flops",
    "gen_knn_cloud",
    "gen_qtips",
    "gen_sbm",
    "graph_power",
    "induced_subgraph",
    "model_logits",
    "normalize_config",
    "run",
    "telescope_gap",
    "theorem_trials",
]
