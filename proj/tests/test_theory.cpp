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

#include <doctest.h>

#include "mgnn/datasets.hpp"
#include "mgnn/error.hpp"
#include "mgnn/theory.hpp"
#include "oracles.hpp"

using namespace mgnn;

namespace {

using Edges = std::vector<std::pair<Index, Index>>;

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

oracle::Dense rows_of(const oracle::Dense& m, const std::vector<Index>& rows) {
  oracle::Dense out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

oracle::Dense block(const oracle::Dense& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  oracle::Dense out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

std::vector<Index> complement(Index n, const std::vector<Index>& c) {
  std::vector<Index> f;
  for (Index i = 0; i < n; ++i) {
    if (!std::binary_search(c.begin(), c.end(), i)) f.push_back(i);
  }
  return f;
}

/// Two cliques {0..k-1} and {k..2k-1} with no edges between them.
SparseGraph two_components(Index k) {
  Edges e;
  for (Index base : {Index{0}, k}) {
    for (Index i = 0; i < k; ++i) {
      for (Index j = i + 1; j < k; ++j) {
        if ((i + j) % 3 != 0) e.emplace_back(base + i, base + j);
      }
    }
  }
  return SparseGraph::from_edges(2 * k, e);
}

}  // namespace

TEST_CASE("solve_ls examples") {
  std::mt19937_64 rng(1);
  Matrix y = random_matrix(4, 2, rng);
  CHECK((solve_ls(Matrix::Identity(4, 4), y).theta - y).cwiseAbs().maxCoeff() < 1e-14);

  Matrix design = random_matrix(30, 3, rng), theta = random_matrix(3, 2, rng);
  Matrix consistent = design * theta;
  CHECK((design * solve_ls(design, consistent).theta - consistent).norm() < 1e-10);

  Matrix targets = random_matrix(30, 2, rng);
  auto sol = solve_ls(design, targets);
  CHECK_FALSE(sol.ridge_used);
  CHECK((oracle::Dense(sol.theta) - oracle::qr_solve(design, targets)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rank-deficient designs use a ridge or fail") {
  Matrix design = Matrix::Zero(5, 2);
  design.col(0).setOnes();
  design.col(1).setOnes();
  Matrix y = Matrix::Ones(5, 1);
  auto sol = solve_ls(design, y);
  CHECK(sol.ridge_used);
  CHECK((design * sol.theta - y).norm() < 1e-6);
  CHECK_THROWS_AS(solve_ls(design, y, false), Error);
}

TEST_CASE("partition and residual match dense blocks") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Index n = 6 + rng() % 20;
    const auto edges = oracle::random_edges(n, 0.3, rng);
    const auto g = SparseGraph::from_edges(n, edges);
    std::vector<Index> c;
    for (Index i = 0; i < n; ++i) {
      if (rng() % 2) c.push_back(i);
    }
    if (c.empty() || c.size() == n) continue;
    const auto f = complement(n, c);
    const auto parts = partition(g, NodeSelection(c));
    const oracle::Dense a = oracle::from_edges(n, edges);
    CHECK(parts.fine_nodes == f);
    CHECK(oracle::to_dense(parts.coarse_graph) == block(a, c, c));
    CHECK(oracle::Dense(parts.cross) == block(a, c, f));
    Matrix x = random_matrix(n, 3, rng), th = random_matrix(3, 2, rng);
    const oracle::Dense xf = rows_of(x, f);
    auto r = residual_term(parts.cross, xf, th);
    const oracle::Dense want = block(a, c, f) * xf * th;
    CHECK((oracle::Dense(r.value) - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.norm == doctest::Approx(want.norm()).epsilon(1e-12));
    CHECK(residual_term(parts.cross, xf, Matrix::Zero(3, 2)).norm == 0.0);
  }
}

TEST_CASE("separable graphs decouple exactly") {
  const Index k = 10;
  const auto g = two_components(k);
  std::mt19937_64 rng(3);
  Matrix x = random_matrix(2 * k, 2, rng), y = random_matrix(2 * k, 3, rng);
  std::vector<Index> c(k);
  for (Index i = 0; i < k; ++i) c[i] = i;
  LinearLSProblem problem{g, x, y, NodeSelection(c)};
  const auto parts = partition(g, problem.coarse);
  CHECK(parts.cross.nonZeros() == 0);
  CHECK(residual_term(parts.cross, rows_of(x, complement(2 * k, c)), random_matrix(2, 3, rng)).norm == 0.0);
  const auto t = check_theorem(problem, 0.1);
  CHECK(t.residual_norm == 0.0);
  CHECK(std::abs(t.coarse_loss - t.sketched_loss) < 1e-10);
  // The restricted fine problem, rows C of A X against Y_C, solved by QR.
  const oracle::Dense ax = oracle::to_dense(g) * oracle::Dense(x);
  const oracle::Dense axc = rows_of(ax, c), yc = rows_of(y, c);
  const oracle::Dense th = oracle::qr_solve(axc, yc);
  CHECK(std::abs(t.coarse_loss - (axc * th - yc).squaredNorm() / (2.0 * 2 * k)) < 1e-10);
  CHECK(t.base_bound_holds);
  CHECK(t.identity_error < 1e-12);
}

TEST_CASE("identity holds on random problems and losses match dense evaluation") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Index n = 30 + rng() % 20;
    const auto edges = oracle::random_edges(n, 0.15, rng);
    const auto g = SparseGraph::from_edges(n, edges);
    Matrix x = random_matrix(n, 3, rng), y = random_matrix(n, 2, rng);
    Rng sel_rng(t);
    LinearLSProblem problem{g, x, y, random_select(n, n / 2, sel_rng)};
    const auto trial = check_theorem(problem, 0.1, t);
    CHECK(trial.identity_error < 1e-10);
    const oracle::Dense ax = oracle::from_edges(n, edges) * oracle::Dense(x);
    const oracle::Dense th = oracle::qr_solve(ax, y);
    CHECK(trial.fine_loss == doctest::Approx((ax * th - oracle::Dense(y)).squaredNorm() / (2.0 * n)).epsilon(1e-9));
    CHECK(trial.factor2_bound == doctest::Approx(2.0 * trial.base_bound));
    CHECK(trial.within_row_regime == (static_cast<double>(n / 2) >= 9.0 / 0.1));
  }
}

TEST_CASE("problem validation") {
  const auto g = two_components(3);
  LinearLSProblem p{g, Matrix::Ones(6, 4), Matrix::Ones(6, 1), NodeSelection({0, 1})};
  CHECK_THROWS_AS(p.validate(), Error);  // |C| < c
  LinearLSProblem q{g, Matrix::Ones(5, 1), Matrix::Ones(6, 1), NodeSelection({0, 1})};
  CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("trial runner reports rates") {
  TheoremConfig cfg;
  cfg.trials = 5;
  auto report = run_theorem_trials(cfg, 7);
  CHECK(report.trials.size() == 5);
  CHECK(report.base_bound_rate >= 0.0);
  CHECK(report.base_bound_rate <= report.factor2_bound_rate);
  CHECK(report.max_identity_error < 1e-10);
  const auto j = report.to_json();
  CHECK(j.at("trials").size() == 5);
  CHECK(j.contains("factor2_bound_rate"));
}
