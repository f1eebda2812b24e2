// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_QUADRATURE_HPP
#define MAXTOMO_QUADRATURE_HPP

#include <array>
#include <vector>

#include "maxtomo/types.hpp"

namespace maxtomo {

// Barycentric quadrature point on a d-simplex. Weights are normalized to
// sum to 1, so integral = measure * sum_q w_q f(x_q).
template <int N>
struct QuadPoint {
  std::array<Real, N> bary;
  Real weight;
};

using TetQuad = std::vector<QuadPoint<4>>;
using TriQuad = std::vector<QuadPoint<3>>;

// Grundmann-Moller simplex rules of polynomial degree 2s+1.
TetQuad tet_quadrature(int s);
TriQuad tri_quadrature(int s);

// Default volume rule: degree 5, exact with margin for the cubic
// integrands of degree-1 edge elements with P1 coefficients.
const TetQuad& default_tet_quadrature();
// Default surface rule for operator terms (degree 5).
const TriQuad& default_tri_quadrature();

// Composite rule: `levels` rounds of uniform 4-way triangle subdivision
// applied to a base rule, expressed in the parent triangle's barycentric
// coordinates. Used where non-polynomial port profiles must be integrated
// to near machine accuracy.
TriQuad refined_tri_quadrature(const TriQuad& base, int levels);

}  // namespace maxtomo

#endif  // MAXTOMO_QUADRATURE_HPP
