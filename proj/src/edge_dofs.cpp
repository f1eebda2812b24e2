// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/edge_dofs.hpp"

#include <algorithm>
#include <map>

namespace maxtomo {

EdgeDofMap build_edge_dof_map(const Mesh& mesh) {
  EdgeDofMap dm;
  std::map<std::pair<int, int>, int> index;
  dm.tet_edge.resize(mesh.n_tets());
  dm.tet_sign.resize(mesh.n_tets());
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& n = mesh.tets[t].nodes;
    for (int le = 0; le < 6; ++le) {
      int a = n[kTetEdges[le][0]], b = n[kTetEdges[le][1]];
      Real sign = 1.0;
      if (a > b) {
        std::swap(a, b);
        sign = -1.0;
      }
      auto [it, inserted] = index.try_emplace({a, b}, dm.n_dofs());
      if (inserted) dm.edges.emplace_back(a, b);
      dm.tet_edge[t][le] = it->second;
      dm.tet_sign[t][le] = sign;
    }
  }
  dm.length.resize(dm.n_dofs());
  dm.tangent.resize(dm.n_dofs());
  for (int e = 0; e < dm.n_dofs(); ++e) {
    Vec3 d = mesh.nodes[dm.edges[e].second] - mesh.nodes[dm.edges[e].first];
    dm.length[e] = d.norm();
    dm.tangent[e] = d / dm.length[e];
  }
  return dm;
}

}  // namespace maxtomo
