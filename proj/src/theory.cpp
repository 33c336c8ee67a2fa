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

#include "mgnn/theory.hpp"

#include <algorithm>
#include <random>

#include "mgnn/coarsening.hpp"
#include "mgnn/datasets.hpp"
#include "mgnn/engine.hpp"
#include "mgnn/error.hpp"

namespace mgnn {

void LinearLSProblem::validate() const {
  const Index n = graph.num_nodes();
  require(static_cast<Index>(features.rows()) == n && static_cast<Index>(targets.rows()) == n,
          "LinearLSProblem: features/targets rows must equal node count");
  coarse.check_against(n);
  require(coarse.size() >= static_cast<Index>(features.cols()),
          "LinearLSProblem: coarse set smaller than the channel count");
}

BlockPartition partition(const SparseGraph& g, const NodeSelection& coarse) {
  coarse.check_against(g.num_nodes());
  constexpr Index kAbsent = static_cast<Index>(-1);
  std::vector<Index> fine_pos(g.num_nodes(), kAbsent);
  std::vector<bool> in_coarse(g.num_nodes(), false);
  for (Index c : coarse.indices()) in_coarse[c] = true;
  BlockPartition out;
  for (Index v = 0; v < g.num_nodes(); ++v) {
    if (!in_coarse[v]) {
      fine_pos[v] = out.fine_nodes.size();
      out.fine_nodes.push_back(v);
    }
  }
  out.coarse_graph = induced_subgraph(g, coarse);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index a = 0; a < coarse.size(); ++a) {
    for (Index w : g.neighbors(coarse[a])) {
      if (fine_pos[w] != kAbsent) {
        entries.emplace_back(static_cast<int>(a), static_cast<int>(fine_pos[w]), 1.0);
      }
    }
  }
  out.cross.resize(static_cast<Eigen::Index>(coarse.size()), static_cast<Eigen::Index>(out.fine_nodes.size()));
  out.cross.setFromTriplets(entries.begin(), entries.end());
  return out;
}

LsSolution solve_ls(const Matrix& design, const Matrix& targets, bool allow_ridge) {
  require(design.rows() == targets.rows(), "solve_ls: design and targets disagree in rows");
  require(design.cols() >= 1, "solve_ls: empty design");
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  LsSolution out;
  if (largest <= 0.0 || smallest <= 1e-12 * largest) {
    require(allow_ridge, "solve_ls: design is rank deficient");
    gram += 1e-10 * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    out.ridge_used = true;
  }
  Eigen::MatrixXd rhs = design.transpose() * targets;
  out.theta = gram.ldlt().solve(rhs);
  return out;
}

Residual residual_term(const SparseBlock& cross, const Matrix& fine_features, const Matrix& theta_coarse) {
  require(cross.cols() == fine_features.rows(), "residual_term: A_CF columns != X_F rows");
  require(fine_features.cols() == theta_coarse.rows(), "residual_term: X_F columns != theta rows");
  Residual r;
  r.value = cross * (fine_features * theta_coarse);
  r.norm = r.value.norm();
  return r;
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = m.row(static_cast<Eigen::Index>(rows[a]));
  return out;
}

}  // namespace

nlohmann::json TheoremTrial::to_json() const {
  return {{"fine_loss", fine_loss},
          {"coarse_loss", coarse_loss},
          {"sketched_loss", sketched_loss},
          {"residual_norm", residual_norm},
          {"identity_error", identity_error},
          {"base_bound", base_bound},
          {"factor2_bound", factor2_bound},
          {"base_bound_holds", base_bound_holds},
          {"factor2_bound_holds", factor2_bound_holds},
          {"within_row_regime", within_row_regime},
          {"ridge_used", ridge_used}};
}

TheoremTrial check_theorem(const LinearLSProblem& problem, double epsilon, std::uint64_t probe_seed,
                           bool allow_ridge) {
  problem.validate();
  require(epsilon > 0.0, "check_theorem: epsilon must be positive");
  const auto& sel = problem.coarse;
  const double n = static_cast<double>(problem.graph.num_nodes());
  const auto c = static_cast<double>(problem.features.cols());

  const Matrix ax = Propagator::adjacency(problem.graph).apply(problem.features);
  auto fine = solve_ls(ax, problem.targets, allow_ridge);
  const double fine_sq = (ax * fine.theta - problem.targets).squaredNorm();

  auto blocks = partition(problem.graph, sel);
  const Matrix x_c = gather_rows(problem.features, sel.indices());
  const Matrix x_f = gather_rows(problem.features, blocks.fine_nodes);
  const Matrix y_c = gather_rows(problem.targets, sel.indices());
  const Matrix coarse_design = Propagator::adjacency(blocks.coarse_graph).apply(x_c);
  auto coarse = solve_ls(coarse_design, y_c, allow_ridge);

  const Matrix ax_c = gather_rows(ax, sel.indices());
  auto residual = residual_term(blocks.cross, x_f, coarse.theta);

  TheoremTrial t;
  t.fine_loss = fine_sq / (2.0 * n);
  t.coarse_loss = (coarse_design * coarse.theta - y_c).squaredNorm() / (2.0 * n);
  t.sketched_loss = (ax_c * coarse.theta - y_c).squaredNorm() / (2.0 * n);
  t.residual_norm = residual.norm;

  Rng rng(probe_seed);
  std::normal_distribution<double> normal;
  Matrix probe(coarse.theta.rows(), coarse.theta.cols());
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = normal(rng);
  for (const Matrix* theta : {&coarse.theta, &probe}) {
    Matrix lhs = coarse_design * *theta + residual_term(blocks.cross, x_f, *theta).value;
    t.identity_error = std::max(t.identity_error, (lhs - ax_c * *theta).cwiseAbs().maxCoeff());
  }

  const double rsq = residual.norm * residual.norm;
  t.base_bound = (1.0 + epsilon) / (2.0 * n) * (fine_sq + rsq);
  t.factor2_bound = 2.0 * t.base_bound;
  t.base_bound_holds = t.coarse_loss <= t.base_bound;
  t.factor2_bound_holds = t.coarse_loss <= t.factor2_bound;
  t.within_row_regime = static_cast<double>(sel.size()) >= c * c / epsilon;
  t.ridge_used = fine.ridge_used || coarse.ridge_used;
  return t;
}

nlohmann::json TheoremReport::to_json() const {
  nlohmann::json j;
  j["base_bound_rate"] = base_bound_rate;
  j["factor2_bound_rate"] = factor2_bound_rate;
  j["max_identity_error"] = max_identity_error;
  j["num_trials"] = trials.size();
  j["trials"] = nlohmann::json::array();
  for (const auto& t : trials) j["trials"].push_back(t.to_json());
  return j;
}

TheoremReport run_theorem_trials(const TheoremConfig& cfg, std::uint64_t seed) {
  require(cfg.trials >= 1, "theorem: need at least one trial");
  require(cfg.coarse_size >= 1 && cfg.coarse_size <= cfg.num_nodes, "theorem: coarse_size out of range");
  TheoremReport report;
  Rng rng(seed);
  Index base_ok = 0, factor2_ok = 0;
  for (Index trial = 0; trial < cfg.trials; ++trial) {
    SbmSpec sbm{cfg.num_nodes, cfg.blocks, cfg.p_in, cfg.p_out, cfg.feature_noise, rng()};
    GraphData data = gen_sbm(sbm);
    Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(cfg.num_nodes), static_cast<Eigen::Index>(cfg.blocks));
    for (Index i = 0; i < cfg.num_nodes; ++i) targets(static_cast<Eigen::Index>(i), data.labels[i]) = 1.0;
    LinearLSProblem problem{std::move(data.graph), std::move(data.features), std::move(targets),
                            random_select(cfg.num_nodes, cfg.coarse_size, rng)};
    auto t = check_theorem(problem, cfg.epsilon, rng());
    base_ok += t.base_bound_holds;
    factor2_ok += t.factor2_bound_holds;
    report.max_identity_error = std::max(report.max_identity_error, t.identity_error);
    report.trials.push_back(t);
  }
  report.base_bound_rate = static_cast<double>(base_ok) / static_cast<double>(cfg.trials);
  report.factor2_bound_rate = static_cast<double>(factor2_ok) / static_cast<double>(cfg.trials);
  return report;
}

}  // namespace mgnn
