// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace maxtomo {

Real signed_volume(const Vec3& a, const Vec3& b, const Vec3& c,
                   const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

Vec3 Mesh::tet_centroid(int t) const {
  const auto& k = tets[t].nodes;
  return (nodes[k[0]] + nodes[k[1]] + nodes[k[2]] + nodes[k[3]]) / 4.0;
}

Real Mesh::tet_volume(int t) const {
  const auto& k = tets[t].nodes;
  return signed_volume(nodes[k[0]], nodes[k[1]], nodes[k[2]], nodes[k[3]]);
}

int Mesh::n_ports() const {
  int n = 0;
  for (const auto& tri : boundary_tris) n = std::max(n, tri.tag);
  return n;
}

std::vector<int> Mesh::port_tris(int port) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(boundary_tris.size()); ++i)
    if (boundary_tris[i].tag == port) out.push_back(i);
  return out;
}

namespace {

using FaceKey = std::array<int, 3>;

FaceKey face_key(int a, int b, int c) {
  FaceKey k{a, b, c};
  std::sort(k.begin(), k.end());
  return k;
}

// The four faces of tet (n0,n1,n2,n3).
std::array<FaceKey, 4> tet_faces(const Tet& t) {
  const auto& n = t.nodes;
  return {face_key(n[1], n[2], n[3]), face_key(n[0], n[2], n[3]),
          face_key(n[0], n[1], n[3]), face_key(n[0], n[1], n[2])};
}

}  // namespace

void canonicalize_and_validate(Mesh& mesh) {
  const int nn = mesh.n_nodes();
  for (int t = 0; t < mesh.n_tets(); ++t) {
    auto& nd = mesh.tets[t].nodes;
    for (int v : nd)
      if (v < 0 || v >= nn)
        fail_config("tet " + std::to_string(t) + " references node " +
                    std::to_string(v) + " out of range");
    Real vol = mesh.tet_volume(t);
    if (vol < 0) {
      std::swap(nd[2], nd[3]);
      vol = -vol;
    }
    if (!(vol > 0))
      fail_config("tet " + std::to_string(t) + " has non-positive volume");
  }

  // Face incidence: boundary = faces appearing in exactly one tet.
  std::map<FaceKey, int> count;
  for (const auto& tet : mesh.tets)
    for (const auto& f : tet_faces(tet)) ++count[f];
  for (const auto& [f, c] : count)
    if (c > 2)
      fail_config("face (" + std::to_string(f[0]) + "," +
                  std::to_string(f[1]) + "," + std::to_string(f[2]) +
                  ") shared by " + std::to_string(c) + " tets");

  std::map<FaceKey, int> covered;  // boundary face -> times tagged
  for (int i = 0; i < static_cast<int>(mesh.boundary_tris.size()); ++i) {
    const auto& tri = mesh.boundary_tris[i];
    for (int v : tri.nodes)
      if (v < 0 || v >= nn)
        fail_config("boundary tri " + std::to_string(i) +
                    " references node out of range");
    FaceKey k = face_key(tri.nodes[0], tri.nodes[1], tri.nodes[2]);
    auto it = count.find(k);
    if (it == count.end() || it->second != 1)
      fail_config("boundary tri " + std::to_string(i) +
                  " is not a face of exactly one tet");
    ++covered[k];
  }
  for (const auto& [f, c] : covered)
    if (c > 1) fail_config("boundary face covered by more than one tri");
  for (const auto& [f, c] : count)
    if (c == 1 && covered.find(f) == covered.end())
      fail_config("uncovered boundary face (" + std::to_string(f[0]) + "," +
                  std::to_string(f[1]) + "," + std::to_string(f[2]) + ")");

  // Port tags 1..N must each be non-empty.
  int nport = mesh.n_ports();
  std::vector<int> tri_count(nport + 1, 0);
  for (const auto& tri : mesh.boundary_tris) {
    if (tri.tag > 0) ++tri_count[tri.tag];
    if (tri.tag < kTagAbsorbing)
      fail_config("boundary tri has invalid tag " + std::to_string(tri.tag));
  }
  for (int p = 1; p <= nport; ++p)
    if (tri_count[p] == 0)
      fail_config("port tag " + std::to_string(p) + " is empty");
}

// ---------------------------------------------------------------------------
// MSH-lite I/O

namespace {

struct LineReader {
  std::istream& in;
  int lineno = 0;
  std::string next() {
    std::string line;
    if (!std::getline(in, line)) fail_config("unexpected end of file");
    ++lineno;
    return line;
  }
  [[noreturn]] void fail(const std::string& msg) {
    fail_config("parse error at line " + std::to_string(lineno) + ": " + msg);
  }
};

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("cannot open mesh file '" + path + "'");
  LineReader rd{in};

  auto expect_section = [&](const char* name) {
    std::string line = rd.next();
    if (line != name) rd.fail(std::string("expected ") + name);
  };
  auto read_count = [&]() {
    std::string line = rd.next();
    long n = -1;
    std::istringstream ss(line);
    if (!(ss >> n) || n < 0) rd.fail("expected a count");
    return static_cast<int>(n);
  };

  Mesh mesh;
  expect_section("$Nodes");
  int nn = read_count();
  mesh.nodes.reserve(nn);
  for (int i = 0; i < nn; ++i) {
    std::istringstream ss(rd.next());
    long id;
    double x, y, z;
    if (!(ss >> id >> x >> y >> z)) rd.fail("malformed node line");
    if (id != i + 1) rd.fail("node ids must be sequential starting at 1");
    mesh.nodes.emplace_back(x, y, z);
  }

  expect_section("$Tets");
  int nt = read_count();
  mesh.tets.reserve(nt);
  for (int i = 0; i < nt; ++i) {
    std::istringstream ss(rd.next());
    long id, n1, n2, n3, n4, region;
    if (!(ss >> id >> n1 >> n2 >> n3 >> n4 >> region))
      rd.fail("malformed tet line");
    if (id != i + 1) rd.fail("tet ids must be sequential starting at 1");
    Tet t;
    t.nodes = {static_cast<int>(n1 - 1), static_cast<int>(n2 - 1),
               static_cast<int>(n3 - 1), static_cast<int>(n4 - 1)};
    t.region = static_cast<int>(region);
    mesh.tets.push_back(t);
  }

  expect_section("$BoundaryTris");
  int nb = read_count();
  mesh.boundary_tris.reserve(nb);
  for (int i = 0; i < nb; ++i) {
    std::istringstream ss(rd.next());
    long id, n1, n2, n3, tag;
    if (!(ss >> id >> n1 >> n2 >> n3 >> tag))
      rd.fail("malformed boundary tri line");
    if (id != i + 1)
      rd.fail("boundary tri ids must be sequential starting at 1");
    BoundaryTri tri;
    tri.nodes = {static_cast<int>(n1 - 1), static_cast<int>(n2 - 1),
                 static_cast<int>(n3 - 1)};
    tri.tag = static_cast<int>(tag);
    mesh.boundary_tris.push_back(tri);
  }

  canonicalize_and_validate(mesh);
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_config("cannot open '" + path + "' for writing");
  char buf[128];
  out << "$Nodes\n" << mesh.nodes.size() << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const Vec3& p = mesh.nodes[i];
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g\n", i + 1, p.x(),
                  p.y(), p.z());
    out << buf;
  }
  out << "$Tets\n" << mesh.tets.size() << "\n";
  for (int i = 0; i < mesh.n_tets(); ++i) {
    const auto& t = mesh.tets[i];
    out << i + 1 << ' ' << t.nodes[0] + 1 << ' ' << t.nodes[1] + 1 << ' '
        << t.nodes[2] + 1 << ' ' << t.nodes[3] + 1 << ' ' << t.region << '\n';
  }
  out << "$BoundaryTris\n" << mesh.boundary_tris.size() << "\n";
  for (int i = 0; i < static_cast<int>(mesh.boundary_tris.size()); ++i) {
    const auto& tri = mesh.boundary_tris[i];
    out << i + 1 << ' ' << tri.nodes[0] + 1 << ' ' << tri.nodes[1] + 1 << ' '
        << tri.nodes[2] + 1 << ' ' << tri.tag << '\n';
  }
  if (!out) fail_config("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Chamber generation

namespace {

// Boundary polygon of the chamber cross-section. Port panels are straight
// chords of width exactly a; gap vertices lie on the circle.
struct CrossSection {
  std::vector<Eigen::Vector2d> pts;
  std::vector<int> edge_slot;  // per edge (i, i+1): antenna slot or -1
};

CrossSection build_cross_section(const ChamberSpec& s) {
  const Real slot_angle = 2.0 * pi / s.antennas_per_ring;
  if (s.port_width >= 2.0 * s.radius)
    fail_config("port width exceeds chamber diameter");
  const Real alpha = std::asin(s.port_width / (2.0 * s.radius));
  if (2.0 * alpha >= slot_angle ||
      s.port_width >= slot_angle * s.radius)
    fail_config("ports overlap: port width too large for " +
                std::to_string(s.antennas_per_ring) + " antennas per ring");

  const int port_cols = std::max(1, static_cast<int>(
                                        std::lround(s.port_width / s.h)));
  CrossSection cs;
  for (int slot = 0; slot < s.antennas_per_ring; ++slot) {
    const Real theta_c = slot_angle * slot;
    const Eigen::Vector2d p0(s.radius * std::cos(theta_c - alpha),
                             s.radius * std::sin(theta_c - alpha));
    const Eigen::Vector2d p1(s.radius * std::cos(theta_c + alpha),
                             s.radius * std::sin(theta_c + alpha));
    // Panel: straight chord subdivided into port_cols edges.
    for (int c = 0; c < port_cols; ++c) {
      Real f = static_cast<Real>(c) / port_cols;
      cs.pts.push_back(p0 + f * (p1 - p0));
      cs.edge_slot.push_back(slot);
    }
    // Gap arc to the next panel, on the circle.
    const Real gap = slot_angle - 2.0 * alpha;
    const int gap_cols =
        std::max(1, static_cast<int>(std::ceil(gap * s.radius / s.h)));
    for (int c = 0; c < gap_cols; ++c) {
      Real th = theta_c + alpha + gap * c / gap_cols;
      if (c > 0)
        cs.pts.emplace_back(s.radius * std::cos(th), s.radius * std::sin(th));
      else
        cs.pts.push_back(p1);
      cs.edge_slot.push_back(-1);
    }
  }
  return cs;
}

// z levels with mandatory breakpoints at every ring band edge. Each
// interval is labeled with the ring whose port band contains it, or -1.
struct ZLevels {
  std::vector<Real> z;
  std::vector<int> interval_ring;
};

ZLevels build_z_levels(const ChamberSpec& s) {
  std::vector<Real> brk{0.0, s.height};
  std::vector<std::pair<Real, Real>> bands;
  for (int r = 0; r < s.n_rings; ++r) {
    Real zc = s.height * (r + 0.5) / s.n_rings;
    Real lo = zc - s.port_height / 2.0, hi = zc + s.port_height / 2.0;
    if (lo <= 0.0 || hi >= s.height ||
        (r > 0 && lo <= bands.back().second))
      fail_config("ports overlap: port height too large for " +
                  std::to_string(s.n_rings) + " rings");
    bands.emplace_back(lo, hi);
    brk.push_back(lo);
    brk.push_back(hi);
  }
  std::sort(brk.begin(), brk.end());

  ZLevels zl;
  zl.z.push_back(brk.front());
  for (size_t i = 0; i + 1 < brk.size(); ++i) {
    Real len = brk[i + 1] - brk[i];
    int nsub = std::max(1, static_cast<int>(std::lround(len / s.h)));
    int ring = -1;
    for (int r = 0; r < s.n_rings; ++r)
      if (brk[i] >= bands[r].first - 1e-15 &&
          brk[i + 1] <= bands[r].second + 1e-15)
        ring = r;
    for (int k = 1; k <= nsub; ++k) {
      zl.z.push_back(brk[i] + len * k / nsub);
      zl.interval_ring.push_back(ring);
    }
  }
  return zl;
}

// Orientation-preserving prism rotations; bottom (0,1,2), top (3,4,5).
constexpr int kPrismRot[6][6] = {
    {0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
    {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};

// Splits a prism into 3 tets such that every quad face is cut by the
// diagonal through its smallest global node id; adjacent prisms therefore
// agree on shared faces.
void split_prism(const std::array<int, 6>& v, int region,
                 std::vector<Tet>& out) {
  int best = 0;
  for (int r = 1; r < 6; ++r)
    if (v[kPrismRot[r][0]] < v[kPrismRot[best][0]]) best = r;
  std::array<int, 6> w;
  for (int i = 0; i < 6; ++i) w[i] = v[kPrismRot[best][i]];

  auto emit = [&](int a, int b, int c, int d) {
    Tet t;
    t.nodes = {w[a], w[b], w[c], w[d]};
    t.region = region;
    out.push_back(t);
  };
  if (std::min(w[1], w[5]) < std::min(w[2], w[4])) {
    emit(0, 1, 2, 5);
    emit(0, 1, 5, 4);
    emit(0, 4, 5, 3);
  } else {
    emit(0, 1, 2, 4);
    emit(0, 4, 2, 5);
    emit(0, 4, 5, 3);
  }
}

}  // namespace

Mesh generate_chamber_mesh(const ChamberSpec& s) {
  if (s.radius <= 0 || s.height <= 0 || s.h <= 0)
    fail_config("chamber radius, height and h must be positive");
  if (s.n_rings < 1 || s.antennas_per_ring < 1)
    fail_config("chamber needs at least one ring and one antenna");
  if (s.port_width <= 0 || s.port_height <= 0)
    fail_config("port dimensions must be positive");
  if (s.h > s.radius || s.h > s.height)
    fail_config("mesh size h too coarse for the chamber dimensions");

  const CrossSection cs = build_cross_section(s);
  const ZLevels zl = build_z_levels(s);
  const int np = static_cast<int>(cs.pts.size());
  const int n_radial = std::max(1, static_cast<int>(std::lround(s.radius / s.h)));
  const int n_levels = static_cast<int>(zl.z.size());
  const int n_layers = n_levels - 1;

  Mesh mesh;
  // Node layout per level: center first, then rings k = 1..n_radial scaled
  // copies of the boundary polygon.
  const int nodes_per_level = 1 + n_radial * np;
  auto node_id = [&](int level, int ring, int j) {
    if (ring == 0) return level * nodes_per_level;
    return level * nodes_per_level + 1 + (ring - 1) * np + (j % np);
  };
  mesh.nodes.reserve(static_cast<size_t>(nodes_per_level) * n_levels);
  for (int l = 0; l < n_levels; ++l) {
    mesh.nodes.emplace_back(0.0, 0.0, zl.z[l]);
    for (int k = 1; k <= n_radial; ++k) {
      Real f = static_cast<Real>(k) / n_radial;
      for (int j = 0; j < np; ++j)
        mesh.nodes.emplace_back(f * cs.pts[j].x(), f * cs.pts[j].y(), zl.z[l]);
    }
  }

  // Cross-section triangles: fan around the center, then quad annuli split
  // by the smallest-node-id diagonal (ids are level-independent offsets, so
  // every level triangulates identically).
  struct Tri2 {
    int a, b, c;  // node offsets within a level
  };
  std::vector<Tri2> tris;
  for (int j = 0; j < np; ++j)
    tris.push_back({node_id(0, 0, 0), node_id(0, 1, j), node_id(0, 1, j + 1)});
  for (int k = 1; k < n_radial; ++k) {
    for (int j = 0; j < np; ++j) {
      int a = node_id(0, k, j), b = node_id(0, k, j + 1);
      int c = node_id(0, k + 1, j + 1), d = node_id(0, k + 1, j);
      if (std::min(a, c) < std::min(b, d)) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  }

  mesh.tets.reserve(tris.size() * n_layers * 3);
  for (int l = 0; l < n_layers; ++l) {
    const int lo = l * nodes_per_level, hi = (l + 1) * nodes_per_level;
    for (const auto& t : tris)
      split_prism({t.a + lo, t.b + lo, t.c + lo, t.a + hi, t.b + hi, t.c + hi},
                  0, mesh.tets);
  }

  // Boundary faces: extract faces incident to exactly one tet, then tag by
  // the structured node layout.
  std::map<FaceKey, int> count;
  for (const auto& tet : mesh.tets)
    for (const auto& f : tet_faces(tet)) ++count[f];

  auto level_of = [&](int n) { return n / nodes_per_level; };
  auto offset_of = [&](int n) { return n % nodes_per_level; };
  auto ring_of = [&](int n) {
    int off = offset_of(n);
    return off == 0 ? 0 : 1 + (off - 1) / np;
  };
  auto poly_of = [&](int n) { return (offset_of(n) - 1) % np; };

  for (const auto& [f, c] : count) {
    if (c != 1) continue;
    BoundaryTri tri;
    tri.nodes = {f[0], f[1], f[2]};
    int l0 = level_of(f[0]), l1 = level_of(f[1]), l2 = level_of(f[2]);
    if (l0 == 0 && l1 == 0 && l2 == 0) {
      tri.tag = kTagMetal;  // bottom
    } else if (l0 == n_layers && l1 == n_layers && l2 == n_layers) {
      tri.tag = kTagAbsorbing;  // top cover
    } else {
      // Lateral wall: all nodes on the outermost ring, spanning one z layer
      // and one polygon edge.
      if (ring_of(f[0]) != n_radial || ring_of(f[1]) != n_radial ||
          ring_of(f[2]) != n_radial)
        fail_internal("unclassifiable boundary face in chamber generator");
      int layer = std::min({l0, l1, l2});
      int jmin = np, jmax = 0;
      for (int v : f) {
        int j = poly_of(v);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
      }
      int edge = (jmax - jmin == 1) ? jmin : jmax;  // wrap at np-1 -> 0
      int slot = cs.edge_slot[edge];
      int ring = zl.interval_ring[layer];
      tri.tag = (slot >= 0 && ring >= 0)
                    ? ring * s.antennas_per_ring + slot + 1
                    : kTagMetal;
    }
    mesh.boundary_tris.push_back(tri);
  }

  canonicalize_and_validate(mesh);
  return mesh;
}

PortGeometry port_geometry(const Mesh& mesh, int port) {
  std::vector<int> tris = mesh.port_tris(port);
  if (tris.empty())
    fail_config("port " + std::to_string(port) + " has no tagged triangles");

  // Area-weighted centroid and a common plane normal. Stored triangle
  // orientation is arbitrary, so align every normal with the first one.
  Vec3 normal = Vec3::Zero(), centroid = Vec3::Zero();
  Real area = 0;
  for (int t : tris) {
    const auto& n = mesh.boundary_tris[t].nodes;
    Vec3 cr = (mesh.nodes[n[1]] - mesh.nodes[n[0]])
                  .cross(mesh.nodes[n[2]] - mesh.nodes[n[0]]);
    Real a2 = cr.norm();
    if (area > 0 && cr.dot(normal) < 0) cr = -cr;
    normal += cr / 2.0;
    centroid += a2 / 2.0 *
                (mesh.nodes[n[0]] + mesh.nodes[n[1]] + mesh.nodes[n[2]]) / 3.0;
    area += a2 / 2.0;
  }
  centroid /= area;
  if (normal.norm() < (1.0 - 1e-9) * area)
    fail_config("port " + std::to_string(port) + " is not planar");
  normal.normalize();
  // Outward means pointing away from the mesh interior.
  Vec3 inward_probe = Vec3::Zero();
  for (const auto& tet : mesh.tets) {
    Vec3 c = (mesh.nodes[tet.nodes[0]] + mesh.nodes[tet.nodes[1]] +
              mesh.nodes[tet.nodes[2]] + mesh.nodes[tet.nodes[3]]) /
             4.0;
    inward_probe = c - centroid;
    if (std::abs(inward_probe.dot(normal)) > 1e-12) break;
  }
  if (inward_probe.dot(normal) > 0) normal = -normal;

  PortGeometry g;
  g.tag = port;
  g.normal = normal;
  // eta = in-plane direction closest to +z; xi completes the frame.
  Vec3 z(0, 0, 1);
  Vec3 eta = z - z.dot(normal) * normal;
  if (eta.norm() < 1e-9) {
    Vec3 x(1, 0, 0);
    eta = x - x.dot(normal) * normal;
  }
  eta.normalize();
  Vec3 xi = eta.cross(normal);
  // Extents of the patch in the frame.
  Real xi_lo = 1e300, xi_hi = -1e300, eta_lo = 1e300, eta_hi = -1e300;
  for (int t : tris)
    for (int v : mesh.boundary_tris[t].nodes) {
      Vec3 d = mesh.nodes[v] - centroid;
      xi_lo = std::min(xi_lo, d.dot(xi));
      xi_hi = std::max(xi_hi, d.dot(xi));
      eta_lo = std::min(eta_lo, d.dot(eta));
      eta_hi = std::max(eta_hi, d.dot(eta));
    }
  g.xi_axis = xi;
  g.eta_axis = eta;
  g.a = xi_hi - xi_lo;
  g.b = eta_hi - eta_lo;
  g.origin = centroid + xi_lo * xi + eta_lo * eta;
  return g;
}

}  // namespace maxtomo
