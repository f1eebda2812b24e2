// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/material.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace maxtomo {

MaterialField MaterialField::uniform(const Mesh& mesh, Complex value) {
  MaterialField m;
  m.eps_r.assign(mesh.n_nodes(), value);
  return m;
}

void MaterialField::validate(const Mesh& mesh) const {
  if (static_cast<int>(eps_r.size()) != mesh.n_nodes())
    fail_config("material field has " + std::to_string(eps_r.size()) +
                " nodes, mesh has " + std::to_string(mesh.n_nodes()));
  for (size_t i = 0; i < eps_r.size(); ++i)
    if (std::isnan(eps_r[i].real()) || std::isnan(eps_r[i].imag()))
      fail_config("material field has NaN at node " + std::to_string(i));
}

MaterialField load_material_csv(const Mesh& mesh, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("cannot open material CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "node_id,re,im")
    fail_config("material CSV '" + path + "': expected header node_id,re,im");
  MaterialField m;
  m.eps_r.assign(mesh.n_nodes(), Complex(0, 0));
  std::vector<char> seen(mesh.n_nodes(), 0);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long id;
    double re, im;
    char c1, c2;
    if (!(ss >> id >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
      fail_config("material CSV line " + std::to_string(lineno) +
                  ": malformed");
    if (id < 0 || id >= mesh.n_nodes())
      fail_config("material CSV line " + std::to_string(lineno) +
                  ": node id out of range");
    m.eps_r[id] = Complex(re, im);
    seen[id] = 1;
  }
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (!seen[i])
      fail_config("material CSV is missing node " + std::to_string(i));
  m.validate(mesh);
  return m;
}

void save_material_csv(const MaterialField& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_config("cannot open '" + path + "' for writing");
  out << "node_id,re,im\n";
  char buf[96];
  for (size_t i = 0; i < m.eps_r.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, m.eps_r[i].real(),
                  m.eps_r[i].imag());
    out << buf;
  }
}

}  // namespace maxtomo
