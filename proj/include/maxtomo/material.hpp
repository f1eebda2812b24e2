// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_MATERIAL_HPP
#define MAXTOMO_MATERIAL_HPP

#include <string>
#include <vector>

#include "maxtomo/mesh.hpp"

namespace maxtomo {

// P1 nodal complex relative permittivity. Tets in region 1 (fixed
// background, e.g. ceramic) ignore the nodal values and use the constant
// eps_r_ceramic from PhysicsParams instead.
struct MaterialField {
  std::vector<Complex> eps_r;

  static MaterialField uniform(const Mesh& mesh, Complex value);
  // Throws if any value is NaN or the size does not match the mesh.
  void validate(const Mesh& mesh) const;
};

// Nodal eps_r CSV import/export: header `node_id,re,im`, 0-based ids,
// 17 significant digits.
MaterialField load_material_csv(const Mesh& mesh, const std::string& path);
void save_material_csv(const MaterialField& m, const std::string& path);

}  // namespace maxtomo

#endif  // MAXTOMO_MATERIAL_HPP
