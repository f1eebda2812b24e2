// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_PARTITION_HPP
#define MAXTOMO_PARTITION_HPP

#include <vector>

#include "maxtomo/edge_dofs.hpp"
#include "maxtomo/mesh.hpp"

namespace maxtomo {

enum class PartitionStrategy { CoordinateBisection, GreedyGraph };

// Non-overlapping tet -> subdomain assignment.
std::vector<int> partition(const Mesh& mesh, int n_subdomains,
                           PartitionStrategy strategy =
                               PartitionStrategy::CoordinateBisection);

// DoFs shared with one neighboring subdomain. For a pair (i, j), position p
// in i's map and in j's map refers to the same global DoF.
struct ExchangeMap {
  int other = -1;
  std::vector<int> local;  // local DoF indices, ordered by global DoF id
};

struct Subdomain {
  std::vector<int> tets0;     // non-overlapping tets (sorted)
  std::vector<int> tets;      // overlap-grown tets (sorted, superset)
  std::vector<int> dofs;      // restriction R_i: sorted global DoF ids
  std::vector<Real> weights;  // partition-of-unity diagonal D_i, per local DoF
  std::vector<ExchangeMap> neighbors;
};

struct OverlapDecomposition {
  int n_subdomains = 0;
  int overlap = 0;  // delta
  std::vector<int> assignment;  // tet -> owning subdomain
  std::vector<Subdomain> subdomains;
};

// Grows each subdomain by delta layers of node-sharing (vertex-adjacent)
// tets. DoF restrictions and partition-of-unity weights are filled by
// build_partition_of_unity.
OverlapDecomposition grow_overlap(const Mesh& mesh,
                                  const std::vector<int>& assignment,
                                  int delta);

// Fills Subdomain::dofs and Subdomain::weights. The nodal hat functions
// chi~_i are 1 at nodes of T_i^0 and 0 elsewhere on T_i^delta; chi_i is
// their nodal normalization, and each edge DoF takes the midpoint value
// (chi_i(n1) + chi_i(n2)) / 2. Requires delta >= 1.
void build_partition_of_unity(OverlapDecomposition& decomp, const Mesh& mesh,
                              const EdgeDofMap& dofs);

// Nodal chi_i values on the whole mesh for one subdomain (diagnostics and
// property tests).
std::vector<Real> nodal_chi(const OverlapDecomposition& decomp,
                            const Mesh& mesh, int subdomain);

}  // namespace maxtomo

#endif  // MAXTOMO_PARTITION_HPP
