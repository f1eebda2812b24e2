// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace maxtomo {

LbfgsResult lbfgs_minimize(const Objective& objective, VecX x0,
                           const LbfgsOptions& opts) {
  LbfgsResult res;
  res.x = std::move(x0);
  const auto dim = res.x.size();

  VecX g(dim);
  Real J = objective(res.x, &g);
  res.cost = J;
  res.history.push_back({0, J, g.norm(), 0.0});

  const Real threshold =
      std::max(opts.threshold_relative ? opts.cost_threshold * J
                                       : opts.cost_threshold,
               opts.cost_floor);
  if (J <= threshold) {
    res.status = LbfgsStatus::CostThreshold;
    return res;
  }

  struct Pair {
    VecX s, y;
    Real rho;
  };
  std::deque<Pair> mem;
  Real gamma = 1.0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    // Two-loop recursion for p = -H g.
    VecX q = g;
    std::vector<Real> alpha(mem.size());
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
      alpha[i] = mem[i].rho * mem[i].s.dot(q);
      q -= alpha[i] * mem[i].y;
    }
    q *= gamma;
    for (size_t i = 0; i < mem.size(); ++i) {
      const Real beta = mem[i].rho * mem[i].y.dot(q);
      q += (alpha[i] - beta) * mem[i].s;
    }
    VecX p = -q;

    Real slope = g.dot(p);
    if (slope >= 0) {  // fall back to steepest descent
      p = -g;
      slope = -g.squaredNorm();
      mem.clear();
      gamma = 1.0;
    }

    // Backtracking Armijo line search. The very first step has no
    // curvature information; cap it so the trial stays O(1) in the
    // variable's own units.
    Real t = 1.0;
    if (mem.empty()) {
      const Real pnorm = p.norm();
      if (pnorm > 1.0) t = 1.0 / pnorm;
    }
    Real J_new = 0;
    VecX x_new;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_linesearch; ++ls) {
      x_new = res.x + t * p;
      J_new = objective(x_new, nullptr);
      if (std::isfinite(J_new) && J_new <= J + opts.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
      t /= 2.0;
    }
    if (!accepted) {
      res.status = LbfgsStatus::LineSearchFailure;
      res.iterations = iter - 1;
      return res;
    }

    VecX g_new(dim);
    const Real J_check = objective(x_new, &g_new);
    (void)J_check;

    VecX s = x_new - res.x;
    VecX y = g_new - g;
    const Real sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      mem.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
      gamma = sy / mem.back().y.squaredNorm();
    }

    res.x = std::move(x_new);
    J = J_new;
    g = std::move(g_new);
    res.cost = J;
    res.iterations = iter;
    res.history.push_back({iter, J, g.norm(), t});

    if (J <= threshold) {
      res.status = LbfgsStatus::CostThreshold;
      return res;
    }
  }
  res.status = LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace maxtomo
