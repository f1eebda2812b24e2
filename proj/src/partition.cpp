// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/partition.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <deque>
#include <map>
#include <numeric>

namespace maxtomo {

namespace {

std::vector<std::vector<int>> node_to_tets(const Mesh& mesh) {
  std::vector<std::vector<int>> inc(mesh.n_nodes());
  for (int t = 0; t < mesh.n_tets(); ++t)
    for (int v : mesh.tets[t].nodes) inc[v].push_back(t);
  return inc;
}

// Face-adjacency neighbor lists (used by the greedy strategy).
std::vector<std::vector<int>> face_neighbors(const Mesh& mesh) {
  std::map<std::array<int, 3>, int> first;
  std::vector<std::vector<int>> nbr(mesh.n_tets());
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const auto& n = mesh.tets[t].nodes;
    const int faces[4][3] = {{n[1], n[2], n[3]},
                             {n[0], n[2], n[3]},
                             {n[0], n[1], n[3]},
                             {n[0], n[1], n[2]}};
    for (const auto& f : faces) {
      std::array<int, 3> k{f[0], f[1], f[2]};
      std::sort(k.begin(), k.end());
      auto [it, inserted] = first.try_emplace(k, t);
      if (!inserted) {
        nbr[t].push_back(it->second);
        nbr[it->second].push_back(t);
      }
    }
  }
  return nbr;
}

void bisect(const Mesh& mesh, std::vector<int>& items, int first_id, int k,
            std::vector<int>& out) {
  if (k == 1) {
    for (int t : items) out[t] = first_id;
    return;
  }
  // Split along the axis of largest centroid bounding-box extent; equal
  // extents resolved in x, y, z order.
  Vec3 lo(1e300, 1e300, 1e300), hi = -lo;
  for (int t : items) {
    Vec3 c = mesh.tet_centroid(t);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  Vec3 ext = hi - lo;
  int axis = 0;
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;

  std::sort(items.begin(), items.end(), [&](int a, int b) {
    Real ca = mesh.tet_centroid(a)[axis], cb = mesh.tet_centroid(b)[axis];
    return ca != cb ? ca < cb : a < b;
  });
  const int k1 = k / 2;
  const auto cut = static_cast<std::ptrdiff_t>(
      (static_cast<long long>(items.size()) * k1) / k);
  std::vector<int> left(items.begin(), items.begin() + cut);
  std::vector<int> right(items.begin() + cut, items.end());
  bisect(mesh, left, first_id, k1, out);
  bisect(mesh, right, first_id + k1, k - k1, out);
}

std::vector<int> greedy_graph(const Mesh& mesh, int k) {
  auto nbr = face_neighbors(mesh);
  const int nt = mesh.n_tets();
  std::vector<int> out(nt, -1);
  int unassigned = nt;
  int scan = 0;  // lowest possibly-unassigned tet
  for (int part = 0; part < k; ++part) {
    int target = (unassigned + (k - part) - 1) / (k - part);
    int taken = 0;
    std::deque<int> frontier;
    while (taken < target) {
      if (frontier.empty()) {
        while (scan < nt && out[scan] >= 0) ++scan;
        if (scan == nt) break;
        frontier.push_back(scan);
        out[scan] = part;
        ++taken;
        --unassigned;
        continue;
      }
      int t = frontier.front();
      frontier.pop_front();
      for (int u : nbr[t]) {
        if (out[u] >= 0 || taken >= target) continue;
        out[u] = part;
        ++taken;
        --unassigned;
        frontier.push_back(u);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<int> partition(const Mesh& mesh, int n_subdomains,
                           PartitionStrategy strategy) {
  if (n_subdomains < 1 || n_subdomains > mesh.n_tets())
    fail_config("n_subdomains must be in [1, " +
                std::to_string(mesh.n_tets()) + "], got " +
                std::to_string(n_subdomains));
  if (strategy == PartitionStrategy::GreedyGraph)
    return greedy_graph(mesh, n_subdomains);
  std::vector<int> items(mesh.n_tets());
  std::iota(items.begin(), items.end(), 0);
  std::vector<int> out(mesh.n_tets(), -1);
  bisect(mesh, items, 0, n_subdomains, out);
  return out;
}

OverlapDecomposition grow_overlap(const Mesh& mesh,
                                  const std::vector<int>& assignment,
                                  int delta) {
  if (static_cast<int>(assignment.size()) != mesh.n_tets())
    fail_config("assignment size does not match tet count");
  int ns = 0;
  for (int a : assignment) {
    if (a < 0) fail_config("assignment contains unassigned tets");
    ns = std::max(ns, a + 1);
  }
  if (delta < 0) fail_config("overlap delta must be >= 0");

  OverlapDecomposition d;
  d.n_subdomains = ns;
  d.overlap = delta;
  d.assignment = assignment;
  d.subdomains.resize(ns);
  for (int t = 0; t < mesh.n_tets(); ++t)
    d.subdomains[assignment[t]].tets0.push_back(t);

  auto inc = node_to_tets(mesh);
  for (auto& sub : d.subdomains) {
    std::vector<char> in(mesh.n_tets(), 0);
    for (int t : sub.tets0) in[t] = 1;
    std::vector<int> current = sub.tets0;
    for (int layer = 0; layer < delta; ++layer) {
      std::vector<int> added;
      for (int t : current)
        for (int v : mesh.tets[t].nodes)
          for (int u : inc[v])
            if (!in[u]) {
              in[u] = 1;
              added.push_back(u);
            }
      current = std::move(added);
      if (current.empty()) break;
    }
    sub.tets.clear();
    for (int t = 0; t < mesh.n_tets(); ++t)
      if (in[t]) sub.tets.push_back(t);
  }
  return d;
}

void build_partition_of_unity(OverlapDecomposition& d, const Mesh& mesh,
                              const EdgeDofMap& dofs) {
  if (d.n_subdomains > 1 && d.overlap < 1)
    fail_config("partition of unity requires overlap delta >= 1");

  // chi~_j is 1 exactly at the nodes of T_j^0, so the denominator of chi_i
  // at a node is the number of subdomains owning a tet at that node.
  std::vector<int> denom(mesh.n_nodes(), 0);
  std::vector<std::vector<char>> in0(d.n_subdomains);
  for (int i = 0; i < d.n_subdomains; ++i) {
    in0[i].assign(mesh.n_nodes(), 0);
    for (int t : d.subdomains[i].tets0)
      for (int v : mesh.tets[t].nodes)
        if (!in0[i][v]) {
          in0[i][v] = 1;
          ++denom[v];
        }
  }
  for (int v = 0; v < mesh.n_nodes(); ++v)
    assert(denom[v] >= 1 && "every node must belong to some T_j^0");

  for (int i = 0; i < d.n_subdomains; ++i) {
    auto& sub = d.subdomains[i];
    std::vector<char> seen(dofs.n_dofs(), 0);
    sub.dofs.clear();
    for (int t : sub.tets)
      for (int e : dofs.tet_edge[t])
        if (!seen[e]) {
          seen[e] = 1;
          sub.dofs.push_back(e);
        }
    std::sort(sub.dofs.begin(), sub.dofs.end());
    sub.weights.resize(sub.dofs.size());
    for (size_t k = 0; k < sub.dofs.size(); ++k) {
      auto [n1, n2] = dofs.edges[sub.dofs[k]];
      Real c1 = in0[i][n1] ? 1.0 / denom[n1] : 0.0;
      Real c2 = in0[i][n2] ? 1.0 / denom[n2] : 0.0;
      sub.weights[k] = (c1 + c2) / 2.0;
    }
  }

  // Exchange maps: for each pair of subdomains, the shared DoFs in global
  // order, recorded as local indices on both sides.
  for (int i = 0; i < d.n_subdomains; ++i) d.subdomains[i].neighbors.clear();
  for (int i = 0; i < d.n_subdomains; ++i) {
    for (int j = i + 1; j < d.n_subdomains; ++j) {
      const auto& a = d.subdomains[i].dofs;
      const auto& b = d.subdomains[j].dofs;
      ExchangeMap mi, mj;
      mi.other = j;
      mj.other = i;
      size_t p = 0, q = 0;
      while (p < a.size() && q < b.size()) {
        if (a[p] < b[q])
          ++p;
        else if (b[q] < a[p])
          ++q;
        else {
          mi.local.push_back(static_cast<int>(p));
          mj.local.push_back(static_cast<int>(q));
          ++p;
          ++q;
        }
      }
      if (!mi.local.empty()) {
        d.subdomains[i].neighbors.push_back(std::move(mi));
        d.subdomains[j].neighbors.push_back(std::move(mj));
      }
    }
  }
}

std::vector<Real> nodal_chi(const OverlapDecomposition& d, const Mesh& mesh,
                            int subdomain) {
  std::vector<int> denom(mesh.n_nodes(), 0);
  std::vector<char> mine(mesh.n_nodes(), 0);
  for (int i = 0; i < d.n_subdomains; ++i) {
    std::vector<char> seen(mesh.n_nodes(), 0);
    for (int t : d.subdomains[i].tets0)
      for (int v : mesh.tets[t].nodes)
        if (!seen[v]) {
          seen[v] = 1;
          ++denom[v];
          if (i == subdomain) mine[v] = 1;
        }
  }
  std::vector<Real> chi(mesh.n_nodes(), 0.0);
  for (int v = 0; v < mesh.n_nodes(); ++v)
    if (mine[v]) chi[v] = 1.0 / denom[v];
  return chi;
}

}  // namespace maxtomo
