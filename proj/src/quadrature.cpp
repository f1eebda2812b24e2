// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/quadrature.hpp"

#include <cmath>

namespace maxtomo {

namespace {

Real factorial(int n) {
  Real f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Grundmann-Moller rule of index s on the d-simplex, degree 2s+1. Weights
// are returned normalized to sum to 1 (the 1/d! simplex volume is divided
// out). Some weights are negative for s >= 1; the rules are exact for all
// polynomials up to the stated degree, which the tests verify against
// closed-form monomial integrals.
template <int N>
std::vector<QuadPoint<N>> grundmann_moller(int s) {
  constexpr int d = N - 1;
  std::vector<QuadPoint<N>> rule;
  for (int i = 0; i <= s; ++i) {
    const int denom = 2 * s + d + 1 - 2 * i;
    const Real w = ((i % 2) ? -1.0 : 1.0) * std::pow(2.0, -2.0 * s) *
                   std::pow(static_cast<Real>(denom), 2 * s + 1) /
                   (factorial(i) * factorial(2 * s + d + 1 - i)) *
                   factorial(d);
    // Enumerate all beta in N_0^{d+1} with |beta| = s - i.
    std::array<int, N> beta{};
    const int total = s - i;
    // Iterative enumeration of compositions of `total` into N parts.
    beta[0] = total;
    for (;;) {
      QuadPoint<N> qp;
      qp.weight = w;
      for (int k = 0; k < N; ++k)
        qp.bary[k] = (2.0 * beta[k] + 1.0) / denom;
      rule.push_back(qp);
      // next composition (colexicographic)
      int k = 0;
      while (k < N - 1 && beta[k] == 0) ++k;
      if (k == N - 1) break;
      int v = beta[k];
      beta[k] = 0;
      beta[0] = v - 1;
      ++beta[k + 1];
    }
  }
  return rule;
}

}  // namespace

TetQuad tet_quadrature(int s) { return grundmann_moller<4>(s); }
TriQuad tri_quadrature(int s) { return grundmann_moller<3>(s); }

const TetQuad& default_tet_quadrature() {
  static const TetQuad rule = tet_quadrature(2);
  return rule;
}

const TriQuad& default_tri_quadrature() {
  static const TriQuad rule = tri_quadrature(2);
  return rule;
}

TriQuad refined_tri_quadrature(const TriQuad& base, int levels) {
  TriQuad rule = base;
  for (int l = 0; l < levels; ++l) {
    TriQuad next;
    next.reserve(rule.size() * 4);
    // Children of the reference triangle under midpoint subdivision, as
    // barycentric corner triples.
    static const Real corners[4][3][3] = {
        {{1, 0, 0}, {0.5, 0.5, 0}, {0.5, 0, 0.5}},
        {{0.5, 0.5, 0}, {0, 1, 0}, {0, 0.5, 0.5}},
        {{0.5, 0, 0.5}, {0, 0.5, 0.5}, {0, 0, 1}},
        {{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}}};
    for (const auto& child : corners) {
      for (const auto& qp : rule) {
        QuadPoint<3> out;
        out.weight = qp.weight / 4.0;
        for (int k = 0; k < 3; ++k)
          out.bary[k] = qp.bary[0] * child[0][k] + qp.bary[1] * child[1][k] +
                        qp.bary[2] * child[2][k];
        next.push_back(out);
      }
    }
    rule = std::move(next);
  }
  return rule;
}

}  // namespace maxtomo
