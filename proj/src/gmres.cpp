// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/gmres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "maxtomo/counters.hpp"

namespace maxtomo {

namespace {

// Arnoldi state of one right-hand side. Every column owns its basis and
// Hessenberg factors; only operator applications are fused across columns.
struct Column {
  MatXc V;          // n x (capacity), Krylov basis
  MatXc H;          // (capacity+1) x capacity
  VecXc g;          // rotated residual vector
  std::vector<Complex> cs, sn;
  int k = 0;        // Arnoldi steps taken this cycle
  Real beta0 = 0;   // ||b||
  bool active = false;
  bool converged = false;
  int iterations = 0;

  void start_cycle(const VecXc& r0, int capacity) {
    const Real beta = r0.norm();
    V.resize(r0.size(), std::min(capacity + 1, 33));
    H = MatXc::Zero(capacity + 1, capacity);
    g = VecXc::Zero(capacity + 1);
    cs.assign(capacity, Complex(0, 0));
    sn.assign(capacity, Complex(0, 0));
    k = 0;
    g[0] = beta;
    if (beta > 0) V.col(0) = r0 / beta;
  }

  void ensure_capacity(int cols) {
    if (V.cols() < cols) {
      MatXc grown(V.rows(), std::min<Eigen::Index>(cols + 31, H.rows()));
      grown.leftCols(V.cols()) = V;
      V = std::move(grown);
    }
  }

  Real estimate() const { return std::abs(g[k]); }

  VecXc solution_update() const {
    // Solve the k x k triangular system from the rotated Hessenberg.
    VecXc y = g.head(k);
    for (int i = k - 1; i >= 0; --i) {
      for (int j = i + 1; j < k; ++j) y[i] -= H(i, j) * y[j];
      y[i] /= H(i, i);
    }
    return V.leftCols(k) * y;
  }
};

void givens(Complex a, Complex b, Complex& c, Complex& s) {
  const Real scale = std::abs(a) + std::abs(b);
  if (scale == 0) {
    c = 1;
    s = 0;
    return;
  }
  const Real r = scale * std::hypot(std::abs(a) / scale, std::abs(b) / scale);
  c = std::abs(a) / r;
  const Complex sign = a == Complex(0, 0) ? Complex(1, 0) : a / std::abs(a);
  s = sign * std::conj(b) / r;
}

}  // namespace

MatXc gmres(const BlockOperator& apply_A, const BlockOperator& apply_M,
            const MatXc& B, const GmresOptions& opts, SolveStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  counters().block_solves++;
  const int n = static_cast<int>(B.rows());
  const int m = static_cast<int>(B.cols());
  if (opts.tol <= 0) fail_config("gmres tolerance must be positive");

  MatXc X = MatXc::Zero(n, m);
  std::vector<Column> col(m);
  for (int j = 0; j < m; ++j) {
    col[j].beta0 = B.col(j).norm();
    col[j].converged = (col[j].beta0 == 0);  // zero RHS -> zero solution
  }

  const int cycle_len = opts.restart > 0 ? std::min(opts.restart, opts.max_iter)
                                         : opts.max_iter;
  int total_iters = 0;
  int cycles = 0;
  bool resumed = false;

  while (true) {
    // Residuals at the current iterate (B itself on the first cycle).
    MatXc R;
    if (cycles == 0)
      R = B;
    else
      R = B - apply_A(X);
    int n_active = 0;
    for (int j = 0; j < m; ++j) {
      auto& c = col[j];
      c.active = false;
      if (c.converged) continue;
      if (R.col(j).norm() <= opts.tol * c.beta0) {
        c.converged = true;
        continue;
      }
      c.start_cycle(R.col(j), cycle_len);
      c.active = true;
      ++n_active;
    }
    if (n_active == 0 || total_iters >= opts.max_iter) break;

    for (int step = 0; step < cycle_len && total_iters < opts.max_iter;
         ++step, ++total_iters) {
      // Gather the current Krylov vectors of the active columns.
      std::vector<int> act;
      for (int j = 0; j < m; ++j)
        if (col[j].active) act.push_back(j);
      if (act.empty()) break;
      MatXc Vk(n, static_cast<int>(act.size()));
      for (size_t a = 0; a < act.size(); ++a)
        Vk.col(static_cast<int>(a)) = col[act[a]].V.col(col[act[a]].k);

      // Fused operator applications (right preconditioning: A M^-1 v).
      const MatXc W = apply_A(apply_M(Vk));

      for (size_t a = 0; a < act.size(); ++a) {
        auto& c = col[act[a]];
        const int k = c.k;
        VecXc w = W.col(static_cast<int>(a));
        // Classical Gram-Schmidt with one reorthogonalization pass.
        VecXc h = c.V.leftCols(k + 1).adjoint() * w;
        w.noalias() -= c.V.leftCols(k + 1) * h;
        VecXc h2 = c.V.leftCols(k + 1).adjoint() * w;
        w.noalias() -= c.V.leftCols(k + 1) * h2;
        h += h2;
        const Real hk1 = w.norm();
        c.ensure_capacity(k + 2);
        if (hk1 > 0)
          c.V.col(k + 1) = w / hk1;
        else
          c.V.col(k + 1).setZero();  // happy breakdown
        c.H.col(k).head(k + 1) = h;
        c.H(k + 1, k) = hk1;

        // Apply previous rotations, then eliminate the subdiagonal.
        for (int i = 0; i < k; ++i) {
          const Complex t = c.H(i, k);
          c.H(i, k) = c.cs[i] * t + c.sn[i] * c.H(i + 1, k);
          c.H(i + 1, k) = -std::conj(c.sn[i]) * t + c.cs[i] * c.H(i + 1, k);
        }
        givens(c.H(k, k), c.H(k + 1, k), c.cs[k], c.sn[k]);
        c.H(k, k) = c.cs[k] * c.H(k, k) + c.sn[k] * c.H(k + 1, k);
        c.H(k + 1, k) = 0;
        c.g[k + 1] = -std::conj(c.sn[k]) * c.g[k];
        c.g[k] = c.cs[k] * c.g[k];

        c.k = k + 1;
        c.iterations += 1;
        if (c.estimate() <= opts.tol * c.beta0 || hk1 == 0) {
          c.active = false;
          c.converged = true;
        }
      }
    }

    // Fused solution update x += M^-1 (V y) for every column that iterated
    // this cycle.
    std::vector<int> upd;
    for (int j = 0; j < m; ++j)
      if (col[j].k > 0) upd.push_back(j);
    if (!upd.empty()) {
      MatXc U(n, static_cast<int>(upd.size()));
      for (size_t a = 0; a < upd.size(); ++a)
        U.col(static_cast<int>(a)) = col[upd[a]].solution_update();
      const MatXc dX = apply_M(U);
      for (size_t a = 0; a < upd.size(); ++a)
        X.col(upd[a]) += dX.col(static_cast<int>(a));
    }
    ++cycles;

    bool more = false;
    for (int j = 0; j < m; ++j)
      if (!col[j].converged) more = true;
    if (!more) {
      // Exit verification: the Arnoldi estimate can drift from the true
      // residual; if it misses the tolerance by more than 10x, resume once.
      const MatXc R2 = B - apply_A(X);
      bool retry = false;
      for (int j = 0; j < m; ++j)
        if (col[j].beta0 > 0 &&
            R2.col(j).norm() > 10.0 * opts.tol * col[j].beta0)
          retry = true;
      if (retry && !resumed && total_iters < opts.max_iter) {
        resumed = true;
        for (int j = 0; j < m; ++j)
          if (col[j].beta0 > 0 &&
              R2.col(j).norm() > opts.tol * col[j].beta0)
            col[j].converged = false;
        continue;
      }
      break;
    }
    if (total_iters >= opts.max_iter) break;
  }

  if (stats) {
    stats->iterations.resize(m);
    stats->residuals.resize(m);
    stats->converged.resize(m);
    stats->restarts = std::max(0, cycles - 1);
    const MatXc R = B - apply_A(X);
    for (int j = 0; j < m; ++j) {
      stats->iterations[j] = col[j].iterations;
      const Real r = col[j].beta0 > 0 ? R.col(j).norm() / col[j].beta0 : 0.0;
      stats->residuals[j] = r;
      stats->converged[j] = r <= opts.tol || col[j].beta0 == 0;
    }
    stats->wall_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0)
            .count();
  }
  return X;
}

VecXc gmres(const BlockOperator& apply_A, const BlockOperator& apply_M,
            const VecXc& b, const GmresOptions& opts, SolveStats* stats) {
  MatXc B(b.size(), 1);
  B.col(0) = b;
  return gmres(apply_A, apply_M, B, opts, stats).col(0);
}

}  // namespace maxtomo
