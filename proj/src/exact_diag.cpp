// SPDX-License-Identifier: Apache-2.0
#include "symtensor/models/exact_diag.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "symtensor/gamma.hpp"

namespace symtensor::models {

std::vector<double> EdResult::flattened() const {
  std::vector<double> all;
  for (const auto& s : sectors) {
    const int mult = s.sector + 1;
    for (int i = 0; i < s.energies.size(); ++i)
      for (int m = 0; m < mult; ++m) all.push_back(s.energies[i]);
  }
  std::sort(all.begin(), all.end());
  return all;
}

double EdResult::ground_energy() const {
  double e = std::numeric_limits<double>::infinity();
  for (const auto& s : sectors)
    if (s.energies.size() > 0) e = std::min(e, s.energies[0]);
  return e;
}

Charge EdResult::ground_sector() const {
  double e = std::numeric_limits<double>::infinity();
  Charge c = -1;
  for (const auto& s : sectors)
    if (s.energies.size() > 0 && s.energies[0] < e) {
      e = s.energies[0];
      c = s.sector;
    }
  return c;
}

namespace {

RepSpace default_site(const EdOptions& opts) {
  return opts.site.system() ? opts.site : spin_half_site();
}

/// Per-sector dense matrix of the Gamma map between two tree layouts (the
/// degeneracy labels ride along unchanged, reordered through the layouts).
Eigen::MatrixXd gamma_dense(const GammaMap& g, const TreeLayout& lin,
                            const TreeLayout& lout, Charge root) {
  const auto& bin = lin.basis(root);
  const auto& bout = lout.basis(root);
  const auto& pin = lin.paths(root);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<long>(bout.size()),
                                            static_cast<long>(bin.size()));
  // position lookup for the output layout
  std::map<std::pair<SectorPath, std::vector<int>>, int> opos;
  {
    const auto& pout = lout.paths(root);
    for (int y = 0; y < static_cast<int>(bout.size()); ++y) {
      const auto& e = bout[static_cast<std::size_t>(y)];
      opos[{pout[static_cast<std::size_t>(e.path_index)], e.ts}] = y;
    }
  }
  const auto& perm = g.perm();
  for (int x = 0; x < static_cast<int>(bin.size()); ++x) {
    const auto& e = bin[static_cast<std::size_t>(x)];
    const SectorPath& p = pin[static_cast<std::size_t>(e.path_index)];
    const int i = g.in_path_index(p);
    if (i < 0) continue;
    std::vector<int> ts(perm.size());
    for (std::size_t l = 0; l < perm.size(); ++l)
      ts[l] = e.ts[static_cast<std::size_t>(perm[l])];
    for (const auto& term : g.table()[static_cast<std::size_t>(i)]) {
      const SectorPath& q = g.out_paths()[static_cast<std::size_t>(term.out_path)];
      auto it = opos.find({q, ts});
      if (it == opos.end()) continue;
      u(it->second, x) = term.coeff;
    }
  }
  return u;
}

}  // namespace

EdResult exact_diag_blocked(const EdOptions& opts) {
  const RepSpace site = default_site(opts);
  const auto sys = site.system();
  const int L = opts.num_sites;
  if (L < 2) throw std::invalid_argument("exact_diag: need at least two sites");

  const BlockDiagMatrix gate = heisenberg_coupled_blocks(site);
  auto [two, x2] = fuse_spaces(site, site);

  // Coupled-space recursion: per total sector a dense matrix over the
  // iterated-fusion degeneracy basis.
  std::map<Charge, Eigen::MatrixXd> h;
  RepSpace cur = two;
  for (const auto& s : two.sectors()) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.degeneracy, s.degeneracy);
    if (const auto* g = gate.block(s.charge)) m = *g;
    h[s.charge] = m;
  }

  RepSpace prev = site;  // S_{s-2} when the loop body runs for site s
  for (int s = 3; s <= L; ++s) {
    const RepSpace a = prev;  // coupled space of the first s-2 sites
    auto [next, xmap] = fuse_spaces(cur, site);

    // Extended term: H_{s-1} (x) identity on the new site.
    std::map<Charge, Eigen::MatrixXd> hext;
    for (const auto& sec : next.sectors()) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sec.degeneracy, sec.degeneracy);
      for (int t1 = 0; t1 < sec.degeneracy; ++t1) {
        const auto& s1 = xmap.source(sec.charge, t1);
        for (int t2 = 0; t2 < sec.degeneracy; ++t2) {
          const auto& s2 = xmap.source(sec.charge, t2);
          if (s1.ca != s2.ca || s1.cb != s2.cb || s1.tb != s2.tb) continue;
          m(t1, t2) = h.at(s1.ca)(s1.ta, s2.ta);
        }
      }
      hext[sec.charge] = std::move(m);
    }

    // Coupling of sites (s-1, s) through the 3-leaf recoupling
    // ((A,B),C) -> (A,(B,C)) with A = S_{s-2}, B = C = site.
    const FusionTree tau_l = left_comb(3);
    const FusionTree tau_r(3, {{1, 2}, {0, 3}});
    const std::vector<RepSpace> spaces3{a, site, site};
    TreeLayout lay_l(tau_l, spaces3);
    TreeLayout lay_r(tau_r, spaces3);
    for (auto& [c, m] : hext) {
      if (lay_l.coupled_space().sector_index(c) < 0) continue;
      const auto g =
          GammaCache::global().get_or_build(tau_l, {0, 1, 2}, tau_r, spaces3, c);
      const Eigen::MatrixXd u = gamma_dense(*g, lay_l, lay_r, c);
      // I_A (x) gate on the (B,C) line, in the tau_r layout.
      const auto& basis = lay_r.basis(c);
      const auto& paths = lay_r.paths(c);
      Eigen::MatrixXd mr = Eigen::MatrixXd::Zero(u.rows(), u.rows());
      for (int y1 = 0; y1 < static_cast<int>(basis.size()); ++y1) {
        const auto& e1 = basis[static_cast<std::size_t>(y1)];
        const SectorPath& p1 = paths[static_cast<std::size_t>(e1.path_index)];
        const Charge e_chg = p1.internals[0];  // node 0 of tau_r fuses (B,C)
        const auto* gb = gate.block(e_chg);
        if (!gb) continue;
        for (int y2 = 0; y2 < static_cast<int>(basis.size()); ++y2) {
          const auto& e2 = basis[static_cast<std::size_t>(y2)];
          const SectorPath& p2 = paths[static_cast<std::size_t>(e2.path_index)];
          if (p2.internals[0] != e_chg) continue;
          if (p1.leaves[0] != p2.leaves[0] || e1.ts[0] != e2.ts[0]) continue;
          const int i1 = x2.coupled_index(
              e_chg, {p1.leaves[1], e1.ts[1], p1.leaves[2], e1.ts[2]});
          const int i2 = x2.coupled_index(
              e_chg, {p2.leaves[1], e2.ts[1], p2.leaves[2], e2.ts[2]});
          mr(y1, y2) = (*gb)(i1, i2);
        }
      }
      m += u.transpose() * mr * u;
    }

    h = std::move(hext);
    prev = cur;
    cur = next;
  }

  // Periodic wrap term: the gate on sites (L, 1), handled on the full
  // L-leaf comb with the permutation that brings those legs onto one node.
  if (opts.periodic && L > 2) {
    // The wrap gate acts with slots (site L, site 1) while the pair node
    // fuses (site 1, site L); conjugate the coupled blocks with the swap.
    std::map<Charge, Eigen::MatrixXd> wrap_gate;
    for (const auto& sec : two.sectors()) {
      const auto* gb = gate.block(sec.charge);
      if (!gb) continue;
      Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(sec.degeneracy, sec.degeneracy);
      for (int t = 0; t < sec.degeneracy; ++t) {
        const auto& src = x2.source(sec.charge, t);
        const int ts = x2.coupled_index(sec.charge, {src.cb, src.tb, src.ca, src.ta});
        sw(ts, t) = sys->r_coeff(src.ca, src.cb, sec.charge);
      }
      wrap_gate[sec.charge] = sw * (*gb) * sw;
    }
    const std::vector<RepSpace> sites(static_cast<std::size_t>(L), site);
    const FusionTree comb = left_comb(L);
    TreeLayout lay_comb(comb, sites);

    // target order (2,...,L-1,1,L); target tree: comb over the first L-2
    // legs, a pair node for (1,L), then the top join.
    std::vector<int> perm;
    for (int i = 1; i < L - 1; ++i) perm.push_back(i);
    perm.push_back(0);
    perm.push_back(L - 1);
    std::vector<FusionTree::Node> nodes;
    int prefix_line = 0;  // line carrying legs (0 .. L-3)
    if (L - 2 >= 2) {
      nodes.push_back({0, 1});
      for (int l = 2; l < L - 2; ++l)
        nodes.push_back({L + static_cast<int>(nodes.size()) - 1, l});
      prefix_line = L + static_cast<int>(nodes.size()) - 1;
    }
    const int pair_node = static_cast<int>(nodes.size());
    nodes.push_back({L - 2, L - 1});  // pair (site 1, site L) in permuted order
    nodes.push_back({prefix_line, L + pair_node});
    const FusionTree tau_p(L, std::move(nodes));
    TreeLayout lay_p(tau_p, sites);

    for (auto& [c, m] : h) {
      if (lay_comb.coupled_space().sector_index(c) < 0) continue;
      const auto g = GammaCache::global().get_or_build(comb, perm, tau_p, sites, c);
      const Eigen::MatrixXd u = gamma_dense(*g, lay_comb, lay_p, c);
      const auto& basis = lay_p.basis(c);
      const auto& paths = lay_p.paths(c);
      Eigen::MatrixXd mr = Eigen::MatrixXd::Zero(u.rows(), u.rows());
      for (int y1 = 0; y1 < static_cast<int>(basis.size()); ++y1) {
        const auto& e1 = basis[static_cast<std::size_t>(y1)];
        const SectorPath& p1 = paths[static_cast<std::size_t>(e1.path_index)];
        const Charge e_chg = p1.internals[static_cast<std::size_t>(pair_node)];
        const auto git = wrap_gate.find(e_chg);
        if (git == wrap_gate.end()) continue;
        const Eigen::MatrixXd* gb = &git->second;
        for (int y2 = 0; y2 < static_cast<int>(basis.size()); ++y2) {
          const auto& e2 = basis[static_cast<std::size_t>(y2)];
          const SectorPath& p2 = paths[static_cast<std::size_t>(e2.path_index)];
          if (p2.internals[static_cast<std::size_t>(pair_node)] != e_chg) continue;
          bool same = true;
          for (int l = 0; l < L - 2 && same; ++l)
            same = p1.leaves[static_cast<std::size_t>(l)] ==
                       p2.leaves[static_cast<std::size_t>(l)] &&
                   e1.ts[static_cast<std::size_t>(l)] == e2.ts[static_cast<std::size_t>(l)];
          for (int n = 0; n < L - 3 && same; ++n)
            same = p1.internals[static_cast<std::size_t>(n)] ==
                   p2.internals[static_cast<std::size_t>(n)];
          if (!same) continue;
          const int i1 = x2.coupled_index(
              e_chg, {p1.leaves[L - 2], e1.ts[L - 2], p1.leaves[L - 1], e1.ts[L - 1]});
          const int i2 = x2.coupled_index(
              e_chg, {p2.leaves[L - 2], e2.ts[L - 2], p2.leaves[L - 1], e2.ts[L - 1]});
          mr(y1, y2) = (*gb)(i1, i2);
        }
      }
      m += u.transpose() * mr * u;
    }
  } else if (opts.periodic && L == 2) {
    // The ring of two sites carries the gate on both bonds.
    for (auto& [c, m] : h) m *= 2.0;
  }

  EdResult result;
  for (const auto& sec : cur.sectors()) {
    if (opts.sectors) {
      const auto& want = *opts.sectors;
      if (std::find(want.begin(), want.end(), sec.charge) == want.end()) continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dec(h.at(sec.charge));
    result.sectors.push_back({sec.charge, dec.eigenvalues()});
  }
  return result;
}

Eigen::MatrixXd dense_hamiltonian(const EdOptions& opts) {
  const RepSpace site = default_site(opts);
  const int n = site.total_dim();
  const int L = opts.num_sites;
  long dim = 1;
  for (int i = 0; i < L; ++i) {
    dim *= n;
    if (dim > opts.dense_limit)
      throw std::invalid_argument("exact_diag_dense: lattice above the dense limit");
  }
  const Eigen::MatrixXd gate = heisenberg_dense_two_site(site);
  Eigen::MatrixXd hdense = Eigen::MatrixXd::Zero(dim, dim);
  // open-chain terms
  for (int s = 0; s + 1 < L; ++s) {
    long left = 1, right = 1;
    for (int i = 0; i < s; ++i) left *= n;
    for (int i = s + 2; i < L; ++i) right *= n;
    for (long il = 0; il < left; ++il)
      for (int a = 0; a < n * n; ++a)
        for (int b = 0; b < n * n; ++b) {
          const double v = gate(a, b);
          if (v == 0.0) continue;
          const long r0 = (il * n * n + a) * right;
          const long c0 = (il * n * n + b) * right;
          for (long ir = 0; ir < right; ++ir) hdense(r0 + ir, c0 + ir) += v;
        }
  }
  if (opts.periodic && L > 2) {
    long mid = 1;
    for (int i = 1; i + 1 < L; ++i) mid *= n;
    for (int aL = 0; aL < n; ++aL)
      for (int a0 = 0; a0 < n; ++a0)
        for (int bL = 0; bL < n; ++bL)
          for (int b0 = 0; b0 < n; ++b0) {
            const double v = gate(aL * n + a0, bL * n + b0);
            if (v == 0.0) continue;
            for (long im = 0; im < mid; ++im)
              hdense((a0 * mid + im) * n + aL, (b0 * mid + im) * n + bL) += v;
          }
  } else if (opts.periodic && L == 2) {
    hdense *= 2.0;
  }
  return hdense;
}

Eigen::VectorXd exact_diag_dense(const EdOptions& opts) {
  const Eigen::MatrixXd hdense = dense_hamiltonian(opts);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dec(hdense);
  return dec.eigenvalues();
}

}  // namespace symtensor::models
