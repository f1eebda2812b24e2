// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/inverse.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <numeric>

namespace maxtomo {

TruncatedMesh truncate_for_ring(const Mesh& mesh, const RingLayout& layout,
                                Real chamber_height, int ring) {
  if (ring < 0 || ring >= layout.n_rings)
    fail_config("ring index " + std::to_string(ring) + " out of range [0, " +
                std::to_string(layout.n_rings) + ")");
  const Real H = chamber_height;
  auto ring_center = [&](int r) {
    return H * (r + 0.5) / layout.n_rings;
  };
  // Keep rings ring-1 .. ring+1; cut mid-gap towards the next ring out.
  Real lo = 0, hi = H;
  if (ring - 2 >= 0) lo = (ring_center(ring - 2) + ring_center(ring - 1)) / 2;
  if (ring + 2 < layout.n_rings)
    hi = (ring_center(ring + 1) + ring_center(ring + 2)) / 2;

  TruncatedMesh out;
  std::vector<int> tet_keep;
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const Real z = mesh.tet_centroid(t).z();
    if (z >= lo && z <= hi) tet_keep.push_back(t);
  }
  if (tet_keep.empty()) fail_internal("ring truncation kept no tets");

  std::vector<int> node_new(mesh.n_nodes(), -1);
  for (int t : tet_keep)
    for (int v : mesh.tets[t].nodes)
      if (node_new[v] < 0) {
        node_new[v] = static_cast<int>(out.node_map.size());
        out.node_map.push_back(v);
        out.mesh.nodes.push_back(mesh.nodes[v]);
      }
  for (int t : tet_keep) {
    Tet nt = mesh.tets[t];
    for (int& v : nt.nodes) v = node_new[v];
    out.mesh.tets.push_back(nt);
  }

  // Faces of the kept set: previously tagged tris keep their tag, newly
  // exposed cut faces become absorbing.
  std::map<std::array<int, 3>, int> old_tags;
  for (const auto& tri : mesh.boundary_tris) {
    std::array<int, 3> k{tri.nodes[0], tri.nodes[1], tri.nodes[2]};
    std::sort(k.begin(), k.end());
    old_tags[k] = tri.tag;
  }
  std::map<std::array<int, 3>, int> count;
  for (int t : tet_keep) {
    const auto& n = mesh.tets[t].nodes;
    for (int opp = 0; opp < 4; ++opp) {
      std::array<int, 3> k;
      int w = 0;
      for (int v = 0; v < 4; ++v)
        if (v != opp) k[w++] = n[v];
      std::sort(k.begin(), k.end());
      ++count[k];
    }
  }
  std::vector<char> port_present(layout.n_rings * layout.antennas_per_ring + 1,
                                 0);
  std::vector<BoundaryTri> raw_tris;
  for (const auto& [k, c] : count) {
    if (c != 1) continue;
    BoundaryTri tri;
    tri.nodes = {node_new[k[0]], node_new[k[1]], node_new[k[2]]};
    auto it = old_tags.find(k);
    tri.tag = it != old_tags.end() ? it->second : kTagAbsorbing;
    if (tri.tag > 0) port_present[tri.tag] = 1;
    raw_tris.push_back(tri);
  }
  // Compact port tags to 1..K.
  std::vector<int> tag_new(port_present.size(), 0);
  for (size_t p = 1; p < port_present.size(); ++p)
    if (port_present[p]) {
      tag_new[p] = static_cast<int>(out.port_orig.size()) + 1;
      out.port_orig.push_back(static_cast<int>(p));
    }
  for (auto& tri : raw_tris) {
    if (tri.tag > 0) tri.tag = tag_new[tri.tag];
    out.mesh.boundary_tris.push_back(tri);
  }
  for (int slot = 0; slot < layout.antennas_per_ring; ++slot) {
    const int orig = layout.tag_of(ring, slot);
    if (orig < static_cast<int>(tag_new.size()) && tag_new[orig] > 0)
      out.transmitters.push_back(tag_new[orig]);
  }
  canonicalize_and_validate(out.mesh);
  return out;
}

ScatteringMatrix remap_smatrix(const ScatteringMatrix& S,
                               const std::vector<int>& port_orig) {
  const int k = static_cast<int>(port_orig.size());
  ScatteringMatrix out = ScatteringMatrix::empty(k);
  out.provenance = S.provenance;
  out.frequency = S.frequency;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const int oi = port_orig[i] - 1, oj = port_orig[j] - 1;
      if (oi < S.n && oj < S.n && S.valid(oi, oj))
        out.set(i, j, S.at(oi, oj));
    }
  return out;
}

namespace {

std::uint64_t material_stamp(const MaterialField& m) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* b = reinterpret_cast<const unsigned char*>(m.eps_r.data());
  const size_t len = m.eps_r.size() * sizeof(Complex);
  for (size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

InverseDriver::InverseDriver(const ForwardContext& ctx, ScatteringMatrix s_mes,
                             ScatteringMatrix s_empty, InverseConfig cfg)
    : ctx_(&ctx),
      s_mes_(std::move(s_mes)),
      s_empty_(std::move(s_empty)),
      cfg_(std::move(cfg)) {
  tx_ = cfg_.transmitters.empty() ? ctx.all_transmitters() : cfg_.transmitters;
  for (int p : tx_)
    if (p < 1 || p > ctx.n_ports())
      fail_config("transmitter " + std::to_string(p) + " out of range");
  if (s_mes_.n != ctx.n_ports())
    fail_config("measured S matrix is " + std::to_string(s_mes_.n) +
                "x" + std::to_string(s_mes_.n) + ", mesh has " +
                std::to_string(ctx.n_ports()) + " ports");
  if (cfg_.normalize && s_empty_.n != ctx.n_ports())
    fail_config("empty-chamber S matrix does not match the port count");

  const Mesh& mesh = *ctx.mesh;
  node_slot_.assign(mesh.n_nodes(), -1);
  if (cfg_.active_nodes.empty()) {
    std::vector<char> imaging(mesh.n_nodes(), 0);
    for (const auto& t : mesh.tets)
      if (t.region == 0)
        for (int v : t.nodes) imaging[v] = 1;
    cfg_.active_nodes = imaging;
  }
  if (static_cast<int>(cfg_.active_nodes.size()) != mesh.n_nodes())
    fail_config("active-node mask does not match the mesh");
  for (int v = 0; v < mesh.n_nodes(); ++v)
    if (cfg_.active_nodes[v]) {
      node_slot_[v] = static_cast<int>(active_.size());
      active_.push_back(v);
    }
  if (active_.empty()) fail_config("no active nodes to optimize");

  // Regularization acts on the fully-active imaging tets only.
  for (int t = 0; t < mesh.n_tets(); ++t) {
    if (mesh.tets[t].region != 0) continue;
    const auto& nd = mesh.tets[t].nodes;
    bool all_active = true;
    for (int v : nd)
      if (node_slot_[v] < 0) all_active = false;
    if (!all_active) continue;
    const TetFrame f = tet_frame(mesh, t);
    RegTet rt;
    for (int k = 0; k < 4; ++k) {
      rt.slot[k] = node_slot_[nd[k]];
      rt.grad[k] = f.grad_lambda[k];
    }
    rt.volume = f.volume;
    reg_tets_.push_back(rt);
  }
}

Real InverseDriver::reg_value(const VecX& re, const VecX& im) const {
  // grad(sum x_k lambda_k) = sum_{k>=1} (x_k - x_0) grad(lambda_k): the
  // difference form keeps the term exactly zero for constant fields.
  Real acc = 0;
  for (const auto& rt : reg_tets_) {
    Vec3 gre = Vec3::Zero(), gim = Vec3::Zero();
    for (int k = 1; k < 4; ++k) {
      gre += (re[rt.slot[k]] - re[rt.slot[0]]) * rt.grad[k];
      gim += (im[rt.slot[k]] - im[rt.slot[0]]) * rt.grad[k];
    }
    acc += rt.volume * (gre.squaredNorm() + gim.squaredNorm());
  }
  return acc;
}

void InverseDriver::reg_gradient(const VecX& re, const VecX& im,
                                 VecX& g) const {
  const Real c2 =
      ctx_->params.kappa_scale() * ctx_->params.kappa_scale();
  for (const auto& rt : reg_tets_) {
    Vec3 gre = Vec3::Zero(), gim = Vec3::Zero();
    for (int k = 1; k < 4; ++k) {
      gre += (re[rt.slot[k]] - re[rt.slot[0]]) * rt.grad[k];
      gim += (im[rt.slot[k]] - im[rt.slot[0]]) * rt.grad[k];
    }
    for (int k = 0; k < 4; ++k) {
      g[2 * rt.slot[k]] += cfg_.alpha * c2 * rt.volume * rt.grad[k].dot(gre);
      g[2 * rt.slot[k] + 1] +=
          cfg_.alpha * c2 * rt.volume * rt.grad[k].dot(gim);
    }
  }
}

VecX InverseDriver::pack(const MaterialField& m) const {
  VecX x(2 * active_.size());
  for (size_t k = 0; k < active_.size(); ++k) {
    x[2 * k] = m.eps_r[active_[k]].real();
    x[2 * k + 1] = m.eps_r[active_[k]].imag();
  }
  return x;
}

MaterialField InverseDriver::unpack(const VecX& x) const {
  if (!base_set_) fail_internal("unpack before minimize/base material set");
  MaterialField m = base_;
  for (size_t k = 0; k < active_.size(); ++k)
    m.eps_r[active_[k]] = Complex(x[2 * k], x[2 * k + 1]);
  return m;
}

namespace {

MisfitTerms misfit_terms(const ScatteringMatrix& S,
                         const ScatteringMatrix& s_mes,
                         const ScatteringMatrix& s_empty, bool normalize,
                         const std::vector<int>& tx) {
  MisfitTerms terms;
  for (int j : tx) {
    for (int rx = 0; rx < S.n; ++rx) {
      const int txi = j - 1;
      if (!s_mes.valid(rx, txi)) continue;
      Real w = 1.0;
      if (normalize) {
        if (!s_empty.valid(rx, txi))
          fail_config("empty-chamber entry (" + std::to_string(rx + 1) + "," +
                      std::to_string(txi + 1) + ") missing for normalization");
        const Real mag = std::abs(s_empty.at(rx, txi));
        if (mag == 0)
          fail_config("empty-chamber entry (" + std::to_string(rx + 1) + "," +
                      std::to_string(txi + 1) + ") is zero");
        w = 1.0 / (mag * mag);
      }
      const Complex r = S.at(rx, txi) - s_mes.at(rx, txi);
      terms.rx.push_back(rx);
      terms.tx.push_back(txi);
      terms.weight.push_back(w);
      terms.residual.push_back(w * r);
      terms.value += 0.5 * w * std::norm(r);
    }
  }
  return terms;
}

}  // namespace

InverseDriver::CostEvaluation InverseDriver::evaluate_cost(
    const MaterialField& m) const {
  CostEvaluation ev;
  ev.op = assemble(*ctx_, m);

  MatXc B(ctx_->numbering.n(), static_cast<int>(tx_.size()));
  for (size_t c = 0; c < tx_.size(); ++c) {
    const auto& port = ctx_->ports[tx_[c] - 1];
    B.col(static_cast<int>(c)) = Complex(0, 1) * port.beta * port.overlap;
  }
  SolveStats stats;
  ev.fields = ev.op.solve(*ctx_, B, &stats);
  for (size_t c = 0; c < tx_.size(); ++c)
    if (!stats.converged[c])
      fail_solver("state solve for transmitter " + std::to_string(tx_[c]) +
                  " did not converge (residual " +
                  std::to_string(stats.residuals[c]) + ")");
  ev.S = compute_smatrix(ctx_->ports, ev.fields, tx_, ctx_->params.frequency);

  const auto terms =
      misfit_terms(ev.S, s_mes_, s_empty_, cfg_.normalize, tx_);
  ev.J_misfit = terms.value;

  // Tikhonov on kappa = scale * eps_r, restricted to the active region.
  if (cfg_.alpha > 0) {
    VecX re(active_.size()), im(active_.size());
    for (size_t k = 0; k < active_.size(); ++k) {
      re[k] = m.eps_r[active_[k]].real();
      im[k] = m.eps_r[active_[k]].imag();
    }
    const Real c2 = ctx_->params.kappa_scale() * ctx_->params.kappa_scale();
    ev.J_reg = 0.5 * cfg_.alpha * c2 * reg_value(re, im);
  }
  ev.J = ev.J_misfit + ev.J_reg;
  ev.stamp = material_stamp(m);
  return ev;
}

MatXc InverseDriver::solve_adjoint(const CostEvaluation& ev) const {
  const auto terms =
      misfit_terms(ev.S, s_mes_, s_empty_, cfg_.normalize, tx_);
  // d_j = sum_i r_ij q_i / nu_i on each transmitter column.
  MatXc D = MatXc::Zero(ctx_->numbering.n(), static_cast<int>(tx_.size()));
  std::map<int, int> col_of;
  for (size_t c = 0; c < tx_.size(); ++c) col_of[tx_[c] - 1] = static_cast<int>(c);
  for (size_t k = 0; k < terms.residual.size(); ++k) {
    const auto& port = ctx_->ports[terms.rx[k]];
    D.col(col_of.at(terms.tx[k])) +=
        (terms.residual[k] / port.norm) * port.overlap;
  }
  SolveStats stats;
  MatXc F = ev.op.solve(*ctx_, D, &stats);
  for (size_t c = 0; c < tx_.size(); ++c)
    if (!stats.converged[c])
      fail_solver("adjoint solve for transmitter " + std::to_string(tx_[c]) +
                  " did not converge");
  return F;
}

VecX InverseDriver::compute_gradient(const MaterialField& m,
                                     const CostEvaluation& ev,
                                     const MatXc& adjoints) const {
  if (material_stamp(m) != ev.stamp)
    fail_internal("gradient requested for a different iterate than the "
                  "fields were solved on");
  const Mesh& mesh = *ctx_->mesh;
  const auto& numbering = ctx_->numbering;
  const auto& quad = default_tet_quadrature();

  // G(n) = sum_j int phi_n E_j . F_j over imaging tets; the misfit gradient
  // is (Re, Im) = scale * (Re G, -Im G).
  std::vector<Complex> G(mesh.n_nodes(), Complex(0, 0));
  const int m_cols = static_cast<int>(tx_.size());
  MatXc full_E(numbering.n_full(), m_cols), full_F(numbering.n_full(), m_cols);
  for (int c = 0; c < m_cols; ++c) {
    full_E.col(c) = numbering.expand(ev.fields.col(c));
    full_F.col(c) = numbering.expand(adjoints.col(c));
  }
  for (int t = 0; t < mesh.n_tets(); ++t) {
    if (mesh.tets[t].region != 0) continue;
    const TetFrame f = tet_frame(mesh, t);
    const auto& de = numbering.edges.tet_edge[t];
    for (const auto& qp : quad) {
      std::array<Vec3, 6> w;
      for (int a = 0; a < 6; ++a)
        w[a] = numbering.edges.tet_sign[t][a] * edge_basis(f, a, qp.bary);
      Complex dot_sum(0, 0);
      for (int c = 0; c < m_cols; ++c) {
        Vec3c E = Vec3c::Zero(), F = Vec3c::Zero();
        for (int a = 0; a < 6; ++a) {
          E += full_E(de[a], c) * w[a].cast<Complex>();
          F += full_F(de[a], c) * w[a].cast<Complex>();
        }
        dot_sum += E(0) * F(0) + E(1) * F(1) + E(2) * F(2);
      }
      const Complex common = f.volume * qp.weight * dot_sum;
      for (int k = 0; k < 4; ++k)
        G[mesh.tets[t].nodes[k]] += qp.bary[k] * common;
    }
  }

  const Real scale = ctx_->params.kappa_scale();
  VecX g = VecX::Zero(2 * active_.size());
  for (size_t k = 0; k < active_.size(); ++k) {
    g[2 * k] = scale * G[active_[k]].real();
    g[2 * k + 1] = -scale * G[active_[k]].imag();
  }
  if (cfg_.alpha > 0) {
    VecX re(active_.size()), im(active_.size());
    for (size_t k = 0; k < active_.size(); ++k) {
      re[k] = m.eps_r[active_[k]].real();
      im[k] = m.eps_r[active_[k]].imag();
    }
    reg_gradient(re, im, g);
  }
  return g;
}

MatXc InverseDriver::solve_linearized(const CostEvaluation& ev,
                                      const std::vector<Complex>& dkappa) const {
  MatXc R(ctx_->numbering.n(), static_cast<int>(tx_.size()));
  for (size_t c = 0; c < tx_.size(); ++c)
    R.col(static_cast<int>(c)) = assemble_field_scaled_source(
        *ctx_->mesh, ctx_->numbering, dkappa, ev.fields.col(c));
  SolveStats stats;
  MatXc dE = ev.op.solve(*ctx_, R, &stats);
  for (size_t c = 0; c < tx_.size(); ++c)
    if (!stats.converged[c] && R.col(c).norm() > 0)
      fail_solver("linearized solve did not converge");
  return dE;
}

Real InverseDriver::dj_via_linearized(const CostEvaluation& ev,
                                      const std::vector<Complex>& dkappa) const {
  const MatXc dE = solve_linearized(ev, dkappa);
  const auto terms =
      misfit_terms(ev.S, s_mes_, s_empty_, cfg_.normalize, tx_);
  std::map<int, int> col_of;
  for (size_t c = 0; c < tx_.size(); ++c) col_of[tx_[c] - 1] = static_cast<int>(c);
  Real dj = 0;
  for (size_t k = 0; k < terms.residual.size(); ++k) {
    const auto& port = ctx_->ports[terms.rx[k]];
    const Complex ds =
        dE.col(col_of.at(terms.tx[k])).dot(port.overlap) / port.norm;
    dj += (std::conj(terms.residual[k]) * ds).real();
  }
  return dj;
}

Real InverseDriver::evaluate(const VecX& x, VecX* grad) const {
  const bool memo_hit =
      memo_ && memo_->first.size() == x.size() &&
      std::memcmp(memo_->first.data(), x.data(),
                  sizeof(Real) * x.size()) == 0;
  if (memo_hit) {
    if (!grad) return memo_->second.J;
  } else {
    memo_.reset();
  }
  const MaterialField m = unpack(x);
  if (!memo_) memo_.emplace(x, evaluate_cost(m));
  const CostEvaluation& ev = memo_->second;
  if (grad) {
    const MatXc F = solve_adjoint(ev);
    *grad = compute_gradient(m, ev, F);
  }
  return ev.J;
}

Real InverseDriver::solver_noise_floor() const {
  // Inverse-crime residuals cannot drop below the solver tolerance; stop
  // cleanly once J reaches the corresponding quadratic floor.
  size_t n_terms = 0;
  for (int j : tx_)
    for (int rx = 0; rx < s_mes_.n; ++rx)
      if (s_mes_.valid(rx, j - 1)) ++n_terms;
  const Real tol = ctx_->opts.tol;
  return 100.0 * static_cast<Real>(n_terms) * tol * tol;
}

LbfgsResult InverseDriver::minimize(const MaterialField& initial) {
  initial.validate(*ctx_->mesh);
  base_ = initial;
  base_set_ = true;
  memo_.reset();

  LbfgsOptions opts;
  opts.memory = cfg_.memory;
  opts.max_iterations = cfg_.max_iterations;
  opts.cost_threshold = cfg_.cost_threshold;
  opts.threshold_relative = cfg_.threshold_relative;
  opts.cost_floor = solver_noise_floor();

  auto objective = [this](const VecX& x, VecX* g) {
    return this->evaluate(x, g);
  };
  return lbfgs_minimize(objective, pack(initial), opts);
}

}  // namespace maxtomo
