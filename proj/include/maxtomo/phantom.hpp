// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_PHANTOM_HPP
#define MAXTOMO_PHANTOM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maxtomo/forward.hpp"
#include "maxtomo/material.hpp"

namespace maxtomo {

struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Zero();
  Vec3 euler = Vec3::Zero();  // rotation R = Rz(c) Ry(b) Rx(a)

  Eigen::Matrix3d rotation() const;
  bool contains(const Vec3& p) const;
};

enum class StrokeRule { Absolute, MeanWithBlood };

// Reference tissue values at 1 GHz.
inline constexpr Complex kGelEpsR{44.0, -20.0};
inline constexpr Complex kBloodEpsR{68.0, -44.0};

struct PhantomSpec {
  Complex background = kGelEpsR;
  // Optional head region: an ellipsoid or a mesh region tag (>= 0 enables).
  std::optional<Ellipsoid> head;
  int head_region_tag = -1;
  Complex head_eps{0, 0};
  // Optional stroke ellipsoid inside the imaging region.
  std::optional<Ellipsoid> stroke;
  StrokeRule rule = StrokeRule::MeanWithBlood;
  Complex stroke_value{0, 0};  // used by StrokeRule::Absolute
  Complex blood = kBloodEpsR;
};

// Nodal phantom: background everywhere, overridden inside the head region,
// overridden inside the stroke ellipsoid by the stroke rule. Hard errors
// for zero-volume or out-of-mesh ellipsoids and for non-dissipative values.
MaterialField build_phantom(const PhantomSpec& spec, const Mesh& mesh);

// Gaussian noise: each valid entry's real and imaginary part is perturbed
// independently with standard deviation level * |S_ij|. Entries are
// iterated in (tx, rx) lexicographic order so a fixed seed reproduces the
// output bit-exactly.
ScatteringMatrix add_noise(const ScatteringMatrix& S, Real level,
                           std::uint64_t seed);

// Simulates the chamber filled with the homogeneous matching solution.
// Results are cached in cache_dir keyed by (mesh hash, eps_r, frequency);
// pass an empty cache_dir to disable caching.
ScatteringMatrix empty_reference(const ForwardContext& ctx, Complex gel_eps,
                                 const std::string& cache_dir);

// FNV-1a content hash of the mesh (nodes, connectivity, tags).
std::uint64_t mesh_hash(const Mesh& mesh);

// Legacy ASCII VTK unstructured-grid export; one SCALARS block per named
// nodal array, emitted in map order.
void write_vtk(const Mesh& mesh,
               const std::map<std::string, std::vector<Real>>& fields,
               const std::string& path);

}  // namespace maxtomo

#endif  // MAXTOMO_PHANTOM_HPP
