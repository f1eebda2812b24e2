// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "maxtomo/gmres.hpp"

using namespace maxtomo;

namespace {

BlockOperator matrix_op(const MatXc& A) {
  return [A](const MatXc& X) -> MatXc { return A * X; };
}

BlockOperator identity_op() {
  return [](const MatXc& X) -> MatXc { return X; };
}

MatXc random_complex(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  MatXc A(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = Complex(u(rng), u(rng));
  return A;
}

}  // namespace

TEST_CASE("gmres: identity system converges in one iteration") {
  const VecXc b = random_complex(20, 1, 1).col(0);
  GmresOptions opts;
  opts.tol = 1e-12;
  SolveStats stats;
  const VecXc x = gmres(identity_op(), identity_op(), b, opts, &stats);
  CHECK(stats.iterations[0] == 1);
  CHECK((x - b).norm() <= 1e-12 * b.norm());
  CHECK(stats.converged[0] == 1);
}

TEST_CASE("gmres: diagonal system solves exactly within n iterations") {
  const int n = 10;
  MatXc A = MatXc::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = Complex(i + 1, 0);
  const VecXc b = VecXc::Ones(n);
  GmresOptions opts;
  opts.tol = 1e-12;
  SolveStats stats;
  const VecXc x = gmres(matrix_op(A), identity_op(), b, opts, &stats);
  CHECK(stats.iterations[0] <= n);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(x[i] - Complex(1.0 / (i + 1), 0)) <= 1e-10);
  CHECK(stats.residuals[0] <= 1e-12);
}

TEST_CASE("gmres: pseudo-block columns match single-RHS runs") {
  const int n = 50, m = 4;
  MatXc A = random_complex(n, n, 7);
  A += Complex(4, 0) * MatXc::Identity(n, n);  // keep it solvable
  const MatXc B = random_complex(n, m, 8);
  GmresOptions opts;
  opts.tol = 1e-10;
  SolveStats bstats;
  const MatXc X = gmres(matrix_op(A), identity_op(), B, opts, &bstats);
  for (int j = 0; j < m; ++j) {
    SolveStats sstats;
    const VecXc xj =
        gmres(matrix_op(A), identity_op(), VecXc(B.col(j)), opts, &sstats);
    CHECK((X.col(j) - xj).norm() <= 1e-12 * xj.norm());
    CHECK(bstats.iterations[j] == sstats.iterations[0]);
  }
}

TEST_CASE("gmres: zero right-hand side column costs zero iterations") {
  const int n = 30;
  MatXc A = random_complex(n, n, 9) + Complex(5, 0) * MatXc::Identity(n, n);
  MatXc B = random_complex(n, 3, 10);
  B.col(1).setZero();
  SolveStats stats;
  GmresOptions opts;
  const MatXc X = gmres(matrix_op(A), identity_op(), B, opts, &stats);
  CHECK(stats.iterations[1] == 0);
  CHECK(X.col(1).norm() == 0.0);
  CHECK(stats.converged[1] == 1);
}

TEST_CASE("gmres: right preconditioning reports unpreconditioned residuals") {
  const int n = 40;
  MatXc A = random_complex(n, n, 11) + Complex(6, 0) * MatXc::Identity(n, n);
  // A crude preconditioner: the inverse of the diagonal.
  MatXc Minv = MatXc::Zero(n, n);
  for (int i = 0; i < n; ++i) Minv(i, i) = 1.0 / A(i, i);
  const VecXc b = random_complex(n, 1, 12).col(0);
  GmresOptions opts;
  opts.tol = 1e-9;
  SolveStats stats;
  const VecXc x = gmres(matrix_op(A), matrix_op(Minv), b, opts, &stats);
  const Real res = (b - A * x).norm() / b.norm();
  CHECK(stats.converged[0] == 1);
  CHECK(stats.residuals[0] == doctest::Approx(res).epsilon(1e-12));
  CHECK(res <= opts.tol);
}

TEST_CASE("gmres: restart cycles still converge") {
  const int n = 60;
  MatXc A = random_complex(n, n, 13) + Complex(8, 0) * MatXc::Identity(n, n);
  const VecXc b = random_complex(n, 1, 14).col(0);
  GmresOptions opts;
  opts.tol = 1e-8;
  opts.restart = 7;
  opts.max_iter = 400;
  SolveStats stats;
  const VecXc x = gmres(matrix_op(A), identity_op(), b, opts, &stats);
  CHECK(stats.converged[0] == 1);
  CHECK(stats.restarts >= 1);
  CHECK((b - A * x).norm() / b.norm() <= opts.tol);
}

TEST_CASE("gmres: non-convergence is flagged, not thrown") {
  const int n = 30;
  // Indefinite-ish random system with a tiny iteration budget.
  MatXc A = random_complex(n, n, 15);
  const VecXc b = random_complex(n, 1, 16).col(0);
  GmresOptions opts;
  opts.tol = 1e-14;
  opts.max_iter = 3;
  SolveStats stats;
  (void)gmres(matrix_op(A), identity_op(), b, opts, &stats);
  CHECK(stats.converged[0] == 0);
  CHECK(stats.iterations[0] == 3);
}
