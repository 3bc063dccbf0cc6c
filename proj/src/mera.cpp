// SPDX-License-Identifier: Apache-2.0
#include "symtensor/models/mera.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "symtensor/dense_oracle.hpp"

namespace symtensor::models {

namespace {

// ---------------------------------------------------------------------------
// Small named-leg network contraction helper. Every leg name appears on
// exactly two tensors (contracted) or once (open). Contraction is greedy on
// the pair sharing the most legs.
struct NetTensor {
  SymTensor t;
  std::vector<std::string> legs;
};

SymTensor contract_net(std::vector<NetTensor> net, const std::vector<std::string>& out) {
  while (net.size() > 1) {
    int bi = -1, bj = -1, best = 0;
    for (int i = 0; i < static_cast<int>(net.size()); ++i)
      for (int j = i + 1; j < static_cast<int>(net.size()); ++j) {
        int shared = 0;
        for (const auto& a : net[static_cast<std::size_t>(i)].legs)
          for (const auto& b : net[static_cast<std::size_t>(j)].legs)
            if (a == b) ++shared;
        if (shared > best) {
          best = shared;
          bi = i;
          bj = j;
        }
      }
    if (best == 0) throw std::logic_error("contract_net: disconnected network");
    auto& A = net[static_cast<std::size_t>(bi)];
    auto& B = net[static_cast<std::size_t>(bj)];
    std::vector<std::pair<int, int>> pairs;
    for (int x = 0; x < static_cast<int>(A.legs.size()); ++x)
      for (int y = 0; y < static_cast<int>(B.legs.size()); ++y)
        if (A.legs[static_cast<std::size_t>(x)] == B.legs[static_cast<std::size_t>(y)])
          pairs.push_back({x, y});
    NetTensor merged;
    merged.t = contract(A.t, B.t, pairs);
    for (int x = 0; x < static_cast<int>(A.legs.size()); ++x) {
      bool used = false;
      for (const auto& [px, py] : pairs) used = used || px == x;
      if (!used) merged.legs.push_back(A.legs[static_cast<std::size_t>(x)]);
    }
    for (int y = 0; y < static_cast<int>(B.legs.size()); ++y) {
      bool used = false;
      for (const auto& [px, py] : pairs) used = used || py == y;
      if (!used) merged.legs.push_back(B.legs[static_cast<std::size_t>(y)]);
    }
    net.erase(net.begin() + bj);
    net[static_cast<std::size_t>(bi)] = std::move(merged);
  }
  NetTensor& last = net.front();
  if (out.empty()) return std::move(last.t);  // scalar-shaped
  if (last.legs.size() != out.size())
    throw std::logic_error("contract_net: open legs do not match the request");
  std::vector<int> perm;
  for (const auto& name : out) {
    auto it = std::find(last.legs.begin(), last.legs.end(), name);
    if (it == last.legs.end()) throw std::logic_error("contract_net: missing leg " + name);
    perm.push_back(static_cast<int>(it - last.legs.begin()));
  }
  return permute(last.t, perm, left_comb(static_cast<int>(perm.size())));
}

// ---------------------------------------------------------------------------
// Layer diagrams. Fine sites of one coarse cell pair: w_i -> (a1,b1,c1p),
// w_{i+1} -> (a2p,b2,c2); the shared disentangler u acts on (c1p,a2p) and
// emits (c1,a2). The two-site gate sits on one of the three cone bonds:
//   L: (b1,c1)   C: (c1,a2)   R: (a2,b2).
// Legs named *b belong to the bra side; untouched fine legs share one name
// and are traced through (disentanglers outside the cone cancel by
// unitarity).
enum class Pos { L, C, R };

std::vector<NetTensor> layer_diagram(Pos pos, const SymTensor& h, const SymTensor& u,
                                     const SymTensor& w, const char* omit,
                                     const SymTensor* rho) {
  const SymTensor ub = conjugated(u);
  const SymTensor wb = conjugated(w);
  std::vector<NetTensor> net;
  auto put = [&](const char* tag, const SymTensor& t, std::vector<std::string> legs) {
    if (omit && std::string(tag) == omit) return;
    net.push_back({t, std::move(legs)});
  };
  put("w1", w, {"a1", "b1", "c1p", "i1"});
  put("w2", w, {"a2p", "b2", "c2", "i2"});
  put("u", u, {"c1", "a2", "c1p", "a2p"});
  switch (pos) {
    case Pos::L:
      put("h", h, {"b1b", "c1b", "b1", "c1"});
      put("ub", ub, {"c1b", "a2", "c1pb", "a2pb"});
      put("wb1", wb, {"a1", "b1b", "c1pb", "o1"});
      put("wb2", wb, {"a2pb", "b2", "c2", "o2"});
      break;
    case Pos::C:
      put("h", h, {"c1b", "a2b", "c1", "a2"});
      put("ub", ub, {"c1b", "a2b", "c1pb", "a2pb"});
      put("wb1", wb, {"a1", "b1", "c1pb", "o1"});
      put("wb2", wb, {"a2pb", "b2", "c2", "o2"});
      break;
    case Pos::R:
      put("h", h, {"a2b", "b2b", "a2", "b2"});
      put("ub", ub, {"c1", "a2b", "c1pb", "a2pb"});
      put("wb1", wb, {"a1", "b1", "c1pb", "o1"});
      put("wb2", wb, {"a2pb", "b2b", "c2", "o2"});
      break;
  }
  if (rho) net.push_back({*rho, {"i1", "i2", "o1", "o2"}});
  return net;
}

std::vector<std::string> h_slots(Pos pos) {
  switch (pos) {
    case Pos::L: return {"b1", "c1", "b1b", "c1b"};
    case Pos::C: return {"c1", "a2", "c1b", "a2b"};
    default: return {"a2", "b2", "a2b", "b2b"};
  }
}

SymTensor swap_gate(const SymTensor& h) { return permute(h, {1, 0, 3, 2}, left_comb(4)); }

double trace_pair(const SymTensor& rho, const SymTensor& h) {
  return scalar_value(contract(rho, h, {{0, 2}, {1, 3}, {2, 0}, {3, 1}}));
}

// ---------------------------------------------------------------------------
// Isometric maps as block matrices: rows over the fused out-group, columns
// over the fused in-group.
struct MatrixForm {
  BlockDiagMatrix m;
  std::vector<FuseRecord> records;  // out-group then in-group (when fused)
  int out_legs;
};

MatrixForm to_matrix_form(const SymTensor& x, int out_legs) {
  const int in_legs = x.rank() - out_legs;
  std::vector<LegGroup> groups;
  groups.push_back({0, out_legs});
  groups.push_back({out_legs, in_legs});
  auto fr = fuse(x, groups, left_comb(2));
  return {tree_to_blockdiag(fr.tensor), std::move(fr.records), out_legs};
}

SymTensor from_matrix_form(const BlockDiagMatrix& m, const MatrixForm& shape) {
  SymTensor t = blockdiag_to_tree(m);          // (In col, Out row)
  t = permute(t, {1, 0}, left_comb(2));        // (Out, In)
  std::size_t rec = 0;
  if (shape.out_legs >= 2) t = split(t, 0, shape.records[rec++]);
  if (rec < shape.records.size()) t = split(t, t.rank() - 1, shape.records[rec]);
  return new_tree(t, left_comb(t.rank()));
}

/// Polar update: X <- -Q P^T per charge from the SVD of the environment.
/// Returns false when the environment vanishes (tensor kept).
bool polar_update(SymTensor& x, const SymTensor& env, int out_legs) {
  MatrixForm xm = to_matrix_form(x, out_legs);
  // the environment mirrors x's directions leg by leg, so the same grouping
  // yields the matrix with rows over x's in-side and columns over its out-side
  MatrixForm em = to_matrix_form(env, out_legs);
  double scale = 0;
  for (const auto& [c, b] : em.m.blocks()) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  if (scale < 1e-300) return false;
  BlockDiagMatrix updated(xm.m.row_space(), xm.m.col_space());
  for (const auto& s : xm.m.col_space().sectors()) {
    const Charge c = s.charge;
    const Eigen::MatrixXd* old = xm.m.block(c);
    if (!old) continue;
    const Eigen::MatrixXd* eb = em.m.block(c);
    if (!eb || eb->cwiseAbs().maxCoeff() < 1e-300 * scale) {
      updated.set_block(c, *old);
      continue;
    }
    const Eigen::MatrixXd n = eb->transpose();  // rows: out side, cols: in side
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(n, Eigen::ComputeThinU | Eigen::ComputeThinV);
    updated.set_block(c, -dec.matrixU() * dec.matrixV().transpose());
  }
  x = from_matrix_form(updated, xm);
  return true;
}

RepSpace coupled_pair(const RepSpace& a, const RepSpace& b) {
  return fuse_spaces(a, b).first;
}

RepSpace coupled_triple(const RepSpace& f) {
  return fuse_spaces(coupled_pair(f, f), f).first;
}

}  // namespace

int MeraState::bottom_sites() const {
  int n = 2;
  for (int q = 0; q < cfg.layers; ++q) n *= 3;
  return n;
}

MeraState mera_build(const MeraConfig& cfg, const RepSpace& site) {
  if (cfg.layers < 1) throw std::invalid_argument("mera_build: at least one layer");
  if (static_cast<int>(cfg.bonds.size()) != cfg.layers)
    throw std::invalid_argument("mera_build: one bond space per layer required");
  if (cfg.chi_top < 1) throw std::invalid_argument("mera_build: chi_top must be positive");
  MeraState st;
  st.site = site;
  st.cfg = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RepSpace fine = site;
  for (int q = 0; q < cfg.layers; ++q) {
    // disentangler: identity on the coupled fine pair
    const RepSpace pair2 = coupled_pair(fine, fine);
    {
      MatrixForm shape;
      auto layout = std::make_shared<const TreeLayout>(left_comb(2),
                                                       std::vector<RepSpace>{fine, fine});
      shape.out_legs = 2;
      shape.records.push_back({left_comb(2), {fine, fine}, Direction::Out, layout});
      shape.records.push_back({left_comb(2), {fine, fine}, Direction::In, layout});
      st.u.push_back(from_matrix_form(BlockDiagMatrix::identity(pair2), shape));
    }

    // isometry: clip the requested bond against the fused triple, then QR
    const RepSpace triple = coupled_triple(fine);
    std::vector<RepSpace::Sector> kept;
    for (const auto& s : st.cfg.bonds[static_cast<std::size_t>(q)].sectors()) {
      const int avail = triple.degeneracy(s.charge);
      if (avail == 0) {
        std::ostringstream os;
        os << "layer " << q + 1 << ": bond sector " << s.charge
           << " unreachable from the fused fine triple, dropped";
        st.warnings.push_back(os.str());
        continue;
      }
      if (s.degeneracy > avail) {
        std::ostringstream os;
        os << "layer " << q + 1 << ": bond sector " << s.charge << " clipped to "
           << avail;
        st.warnings.push_back(os.str());
        kept.push_back({s.charge, avail});
      } else {
        kept.push_back(s);
      }
    }
    if (kept.empty()) throw std::invalid_argument("mera_build: bond space empty after clipping");
    const RepSpace bond(site.system(), kept);
    st.cfg.bonds[static_cast<std::size_t>(q)] = bond;

    BlockDiagMatrix wm(triple, bond);
    for (const auto& s : bond.sectors()) {
      const int rows = triple.degeneracy(s.charge);
      Eigen::MatrixXd r(rows, s.degeneracy);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < s.degeneracy; ++j) r(i, j) = gauss(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
      Eigen::MatrixXd thin =
          qr.householderQ() * Eigen::MatrixXd::Identity(rows, s.degeneracy);
      wm.set_block(s.charge, std::move(thin));
    }
    {
      MatrixForm shape;
      const RepSpace pair = coupled_pair(fine, fine);
      auto layout3 = std::make_shared<const TreeLayout>(
          left_comb(3), std::vector<RepSpace>{fine, fine, fine});
      shape.out_legs = 3;
      shape.records.push_back({left_comb(3), {fine, fine, fine}, Direction::Out, layout3});
      st.w.push_back(from_matrix_form(wm, shape));
    }
    fine = bond;
  }

  // top tensor on the coupled pair of the highest bond
  {
    const RepSpace pair2 = coupled_pair(fine, fine);
    int avail = pair2.degeneracy(cfg.top_charge);
    if (avail == 0)
      throw std::invalid_argument("mera_build: requested top sector unreachable");
    int chi = cfg.chi_top;
    if (chi > avail) {
      std::ostringstream os;
      os << "top: chi_top clipped to " << avail;
      st.warnings.push_back(os.str());
      chi = avail;
      st.cfg.chi_top = chi;
    }
    RepSpace top_space(site.system(), {{cfg.top_charge, chi}});
    BlockDiagMatrix tm(pair2, top_space);
    Eigen::MatrixXd r(avail, chi);
    for (int i = 0; i < avail; ++i)
      for (int j = 0; j < chi; ++j) r(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
    tm.set_block(cfg.top_charge,
                 qr.householderQ() * Eigen::MatrixXd::Identity(avail, chi));
    MatrixForm shape;
    auto layout = std::make_shared<const TreeLayout>(left_comb(2),
                                                     std::vector<RepSpace>{fine, fine});
    shape.out_legs = 2;
    shape.records.push_back({left_comb(2), {fine, fine}, Direction::Out, layout});
    st.top = from_matrix_form(tm, shape);
  }
  return st;
}

SymTensor mera_ascend(const SymTensor& h, const SymTensor& u, const SymTensor& w) {
  SymTensor out = contract_net(layer_diagram(Pos::L, h, u, w, nullptr, nullptr),
                               {"o1", "o2", "i1", "i2"});
  out = add(out, contract_net(layer_diagram(Pos::C, h, u, w, nullptr, nullptr),
                              {"o1", "o2", "i1", "i2"}));
  out = add(out, contract_net(layer_diagram(Pos::R, h, u, w, nullptr, nullptr),
                              {"o1", "o2", "i1", "i2"}));
  return out;
}

SymTensor mera_descend(const SymTensor& rho, const SymTensor& u, const SymTensor& w) {
  // leave-h-out adjoints of the three ascent diagrams, averaged
  SymTensor out = contract_net(layer_diagram(Pos::L, rho /*unused*/, u, w, "h", &rho),
                               h_slots(Pos::L));
  out = add(out, contract_net(layer_diagram(Pos::C, rho, u, w, "h", &rho), h_slots(Pos::C)));
  out = add(out, contract_net(layer_diagram(Pos::R, rho, u, w, "h", &rho), h_slots(Pos::R)));
  return scale(out, 1.0 / 3.0);
}

SymTensor mera_density(const MeraState& st, int q) {
  // top pair density, bond-averaged
  SymTensor rho = contract(st.top, conjugated(st.top), {{2, 2}});
  rho = scale(add(rho, permute(rho, {1, 0, 3, 2}, left_comb(4))), 0.5);
  for (int layer = st.cfg.layers; layer > q; --layer)
    rho = mera_descend(rho, st.u[static_cast<std::size_t>(layer - 1)],
                       st.w[static_cast<std::size_t>(layer - 1)]);
  return rho;
}

double mera_energy(const MeraState& st, const SymTensor& gate) {
  SymTensor h = gate;
  for (int q = 1; q <= st.cfg.layers; ++q)
    h = mera_ascend(h, st.u[static_cast<std::size_t>(q - 1)],
                    st.w[static_cast<std::size_t>(q - 1)]);
  const SymTensor rho = mera_density(st, st.cfg.layers);
  const double e = 2.0 * trace_pair(rho, h);
  if (!std::isfinite(e)) throw std::runtime_error("mera_energy: non-finite energy");
  return e;
}

double isometry_residual(const SymTensor& x, int out_legs) {
  MatrixForm m = to_matrix_form(x, out_legs);
  double worst = 0;
  for (const auto& [c, b] : m.m.blocks()) {
    const Eigen::MatrixXd g = b.transpose() * b;
    worst = std::max(
        (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), worst);
  }
  return worst;
}

MeraTrace mera_optimize(MeraState& st, const SymTensor& gate, int sweeps) {
  MeraTrace trace;
  double energy = mera_energy(st, gate);
  trace.energies.push_back(energy);

  auto guarded = [&](SymTensor& target, const SymTensor& env, int out_legs) {
    const SymTensor backup = target;
    if (!polar_update(target, env, out_legs)) return;
    const double enew = mera_energy(st, gate);
    if (!std::isfinite(enew)) {
      std::ostringstream os;
      os << "mera_optimize: non-finite energy after an update (previous energy "
         << energy << ")";
      throw std::runtime_error(os.str());
    }
    const double tol = 1e-12 * (1.0 + std::abs(energy));
    if (enew > energy + tol) {
      target = backup;
      ++trace.rejected_updates;
      trace.max_monotonicity_violation =
          std::max(trace.max_monotonicity_violation, enew - energy);
    } else {
      energy = enew;
    }
  };

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int q = 1; q <= st.cfg.layers; ++q) {
      // ascend the gate to below this layer and descend the density to
      // above it, with the current tensors
      SymTensor hbelow = gate;
      for (int p = 1; p < q; ++p)
        hbelow = mera_ascend(hbelow, st.u[static_cast<std::size_t>(p - 1)],
                             st.w[static_cast<std::size_t>(p - 1)]);
      SymTensor rho = mera_density(st, q);
      const SymTensor& u = st.u[static_cast<std::size_t>(q - 1)];
      const SymTensor& w = st.w[static_cast<std::size_t>(q - 1)];

      {  // disentangler environment
        SymTensor env = contract_net(layer_diagram(Pos::L, hbelow, u, w, "u", &rho),
                                     {"c1", "a2", "c1p", "a2p"});
        env = add(env, contract_net(layer_diagram(Pos::C, hbelow, u, w, "u", &rho),
                                    {"c1", "a2", "c1p", "a2p"}));
        env = add(env, contract_net(layer_diagram(Pos::R, hbelow, u, w, "u", &rho),
                                    {"c1", "a2", "c1p", "a2p"}));
        guarded(st.u[static_cast<std::size_t>(q - 1)], env, 2);
      }
      {  // isometry environment: the shared tensor appears in two spots
        rho = mera_density(st, q);
        const SymTensor& u2 = st.u[static_cast<std::size_t>(q - 1)];
        SymTensor env = contract_net(layer_diagram(Pos::L, hbelow, u2, w, "w1", &rho),
                                     {"a1", "b1", "c1p", "i1"});
        env = add(env, contract_net(layer_diagram(Pos::C, hbelow, u2, w, "w1", &rho),
                                    {"a1", "b1", "c1p", "i1"}));
        env = add(env, contract_net(layer_diagram(Pos::R, hbelow, u2, w, "w1", &rho),
                                    {"a1", "b1", "c1p", "i1"}));
        SymTensor env2 = contract_net(layer_diagram(Pos::L, hbelow, u2, w, "w2", &rho),
                                      {"a2p", "b2", "c2", "i2"});
        env2 = add(env2, contract_net(layer_diagram(Pos::C, hbelow, u2, w, "w2", &rho),
                                      {"a2p", "b2", "c2", "i2"}));
        env2 = add(env2, contract_net(layer_diagram(Pos::R, hbelow, u2, w, "w2", &rho),
                                      {"a2p", "b2", "c2", "i2"}));
        env = add(env, env2);
        guarded(st.w[static_cast<std::size_t>(q - 1)], env, 3);
      }
    }
    {  // top tensor
      SymTensor htop = gate;
      for (int p = 1; p <= st.cfg.layers; ++p)
        htop = mera_ascend(htop, st.u[static_cast<std::size_t>(p - 1)],
                           st.w[static_cast<std::size_t>(p - 1)]);
      const SymTensor h2 = add(htop, swap_gate(htop));
      const SymTensor tb = conjugated(st.top);
      std::vector<NetTensor> net;
      net.push_back({h2, {"s1b", "s2b", "s1", "s2"}});
      net.push_back({tb, {"s1b", "s2b", "a"}});
      SymTensor env = contract_net(std::move(net), {"s1", "s2", "a"});
      guarded(st.top, env, 2);
    }
    trace.energies.push_back(energy);
  }
  return trace;
}

Eigen::MatrixXd mera_dense_states(const MeraState& st) {
  if (st.cfg.layers != 1)
    throw std::invalid_argument("mera_dense_states: single-layer oracle only");
  const DenseTensorD wd = to_dense(st.w[0]);
  const DenseTensorD ud = to_dense(st.u[0]);
  const DenseTensorD td = to_dense(st.top);
  // psi[f1..f6, a] = u(f3,f4) u(f6,f1) w(f1..f3, s1) w(f4..f6, s2) t(s1,s2,a)
  DenseTensorD cur = dense_contract(td, wd, {{0, 3}});          // [s2, a, f1,f2,f3]
  cur = dense_contract(cur, wd, {{0, 3}});                      // [a, f1,f2,f3, f4,f5,f6]
  // u on (f3, f4): legs 3 and 4 of cur
  cur = dense_contract(ud, cur, {{2, 3}, {3, 4}});              // [o3,o4, a, f1,f2, f5,f6]
  // u on (f6, f1): pre-legs are cur legs 6 (f6) and 3 (f1)
  cur = dense_contract(ud, cur, {{2, 6}, {3, 3}});              // [o6,o1, o3,o4, a, f2, f5]
  // final order [f1..f6, a]
  const DenseTensorD out = dense_permute(cur, {1, 5, 2, 3, 6, 0, 4});
  const int n = st.site.total_dim();
  long dim = 1;
  for (int i = 0; i < 6; ++i) dim *= n;
  const int a_dim = st.top.declared_space(2).total_dim();
  Eigen::MatrixXd psi(dim, a_dim);
  for (long i = 0; i < dim; ++i)
    for (int a = 0; a < a_dim; ++a) psi(i, a) = out[i * a_dim + a];
  return psi;
}

}  // namespace symtensor::models
