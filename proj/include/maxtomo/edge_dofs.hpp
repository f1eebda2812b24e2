// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_EDGE_DOFS_HPP
#define MAXTOMO_EDGE_DOFS_HPP

#include <array>
#include <utility>
#include <vector>

#include "maxtomo/mesh.hpp"

namespace maxtomo {

// Local edges of a tet (n0..n3), in the order used throughout assembly.
inline constexpr int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                        {1, 2}, {1, 3}, {2, 3}};

// Lowest-order Nedelec DoF numbering: one DoF per mesh edge, canonically
// oriented from the lower to the higher node index.
struct EdgeDofMap {
  std::vector<std::pair<int, int>> edges;  // (lo, hi) node ids
  std::vector<Real> length;                // |e|
  std::vector<Vec3> tangent;               // unit, lo -> hi
  // Per tet: global edge id and orientation sign for each of the 6 local
  // edges (sign -1 when the local pair order disagrees with canonical).
  std::vector<std::array<int, 6>> tet_edge;
  std::vector<std::array<Real, 6>> tet_sign;

  int n_dofs() const { return static_cast<int>(edges.size()); }
};

EdgeDofMap build_edge_dof_map(const Mesh& mesh);

}  // namespace maxtomo

#endif  // MAXTOMO_EDGE_DOFS_HPP
