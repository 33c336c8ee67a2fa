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

#ifndef MGNN_THEORY_HPP
#define MGNN_THEORY_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "mgnn/graph.hpp"

namespace mgnn {

// Linear least-squares model of one graph layer, L(theta) =
// (1/2N) ||A X theta - Y||^2, and its reduced counterpart on a node subset C
// with complement F. Node selection splits A into blocks
//
//   A = [A_CC A_CF; A_FC A_FF],   X = [X_C; X_F],
//
// and P^T A P P^T X theta + A_CF X_F theta = P^T A X theta. The cross term is
// the residual that coarse training cannot see.

using SparseBlock = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearLSProblem {
  SparseGraph graph;  // raw, unnormalized
  Matrix features;    // n x c
  Matrix targets;     // n x d
  NodeSelection coarse;

  void validate() const;
};

struct BlockPartition {
  SparseGraph coarse_graph;  // A_CC
  SparseBlock cross;         // A_CF, |C| x |F|
  std::vector<Index> fine_nodes;  // F, sorted
};

BlockPartition partition(const SparseGraph& g, const NodeSelection& coarse);

struct LsSolution {
  Matrix theta;
  bool ridge_used = false;
};

/// Minimizer of ||design theta - targets||_F via the normal equations. A
/// rank-deficient design gets a 1e-10 ridge when allowed, else throws.
LsSolution solve_ls(const Matrix& design, const Matrix& targets, bool allow_ridge = true);

struct Residual {
  Matrix value;  // A_CF X_F theta_C
  double norm = 0.0;
};

Residual residual_term(const SparseBlock& cross, const Matrix& fine_features, const Matrix& theta_coarse);

struct TheoremTrial {
  double fine_loss = 0.0;      // (1/2N) ||A X theta* - Y||^2
  double coarse_loss = 0.0;    // (1/2N) ||A_CC X_C theta_C* - Y_C||^2
  double sketched_loss = 0.0;  // (1/2N) ||P^T A X theta_C* - P^T Y||^2
  double residual_norm = 0.0;
  double identity_error = 0.0;  // max |A_CC X_C t + A_CF X_F t - (A X t)_C| over t in {theta_C*, random}
  double base_bound = 0.0;    // (1+eps)/(2N) (||A X theta* - Y||^2 + ||R||^2)
  double factor2_bound = 0.0;  // (1+eps)/(2N) * 2 (||A X theta* - Y||^2 + ||R||^2)
  bool base_bound_holds = false;
  bool factor2_bound_holds = false;
  bool within_row_regime = false;  // |C| >= c^2 / eps
  bool ridge_used = false;

  nlohmann::json to_json() const;
};

/// Solves the fine and coarse problems and evaluates both bounds. Losses on
/// both sides use the fine row count N.
TheoremTrial check_theorem(const LinearLSProblem& problem, double epsilon, std::uint64_t probe_seed = 0,
                           bool allow_ridge = true);

struct TheoremConfig {
  Index trials = 100;
  Index num_nodes = 200;
  Index blocks = 4;  // also the channel count c of the block-indicator features
  double p_in = 0.1;
  double p_out = 0.01;
  double feature_noise = 0.5;
  Index coarse_size = 100;
  double epsilon = 0.1;

  friend bool operator==(const TheoremConfig&, const TheoremConfig&) = default;
};

struct TheoremReport {
  std::vector<TheoremTrial> trials;
  double base_bound_rate = 0.0;
  double factor2_bound_rate = 0.0;
  double max_identity_error = 0.0;

  nlohmann::json to_json() const;
};

/// Monte-Carlo over SBM graphs with uniformly random coarse sets; targets
/// are one-hot block labels.
TheoremReport run_theorem_trials(const TheoremConfig& cfg, std::uint64_t seed);

}  // namespace mgnn

#endif  // MGNN_THEORY_HPP
