// SPDX-License-Identifier: Apache-2.0
#include "symtensor/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "symtensor/block_linalg.hpp"
#include "symtensor/counters.hpp"
#include "symtensor/dense_oracle.hpp"
#include "symtensor/models/exact_diag.hpp"
#include "symtensor/models/mera.hpp"
#include "symtensor/su2.hpp"

namespace symtensor::verify {

bool SuiteReport::pass() const {
  for (const auto& p : properties)
    if (!p.pass) return false;
  return true;
}

namespace {

PropertyResult prop(const std::string& name, long instances, double max_residual,
                    double limit) {
  return {name, instances, max_residual, limit, max_residual <= limit};
}

double f_by_cg_contraction(int a, int b, int c, int d, int e, int f) {
  double s = 0;
  const Spin ja(a), jb(b), jc(c), jd(d), je(e), jf(f);
  for (int tma = -a; tma <= a; tma += 2)
    for (int tmb = -b; tmb <= b; tmb += 2)
      for (int tmc = -c; tmc <= c; tmc += 2) {
        const int tme = tma + tmb, tmf = tmb + tmc, tmd = tma + tmb + tmc;
        if (std::abs(tme) > e || std::abs(tmf) > f || std::abs(tmd) > d) continue;
        if ((tme - e) % 2 != 0 || (tmf - f) % 2 != 0 || (tmd - d) % 2 != 0) continue;
        s += cg_coefficient(ja, SpinProjection(tma), jb, SpinProjection(tmb), je,
                            SpinProjection(tme)) *
             cg_coefficient(je, SpinProjection(tme), jc, SpinProjection(tmc), jd,
                            SpinProjection(tmd)) *
             cg_coefficient(jb, SpinProjection(tmb), jc, SpinProjection(tmc), jf,
                            SpinProjection(tmf)) *
             cg_coefficient(ja, SpinProjection(tma), jf, SpinProjection(tmf), jd,
                            SpinProjection(tmd));
      }
  return s / (d + 1);
}

}  // namespace

SuiteReport verify_kernels() {
  SuiteReport rep{"kernels", {}};

  {  // CG orthogonality, both contractions, all spins <= 3
    double worst = 0;
    long inst = 0;
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; b <= 6; ++b) {
        // first identity: split then fuse resolves to the identity on (c, m)
        for (int c = std::abs(a - b); c <= a + b; c += 2)
          for (int c2 = std::abs(a - b); c2 <= a + b; c2 += 2) {
            const CGBlock& blk = cg_block(Spin(a), Spin(b), Spin(c));
            const CGBlock& blk2 = cg_block(Spin(a), Spin(b), Spin(c2));
            for (int mc = 0; mc <= c; ++mc)
              for (int mc2 = 0; mc2 <= c2; ++mc2) {
                double s = 0;
                for (int ia = 0; ia <= a; ++ia)
                  for (int ib = 0; ib <= b; ++ib) {
                    const int tm = (2 * ia - a) + (2 * ib - b);
                    if (tm != 2 * mc - c || tm != 2 * mc2 - c2) continue;
                    s += blk.at(ia, ib, mc) * blk2.at(ia, ib, mc2);
                  }
                const double want = (c == c2 && 2 * mc - c == 2 * mc2 - c2) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(s - want));
                ++inst;
              }
          }
        // second identity: fuse then split resolves to the identity on pairs
        const int maxdim = (a + 1) * (b + 1);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(maxdim, maxdim);
        for (int c = std::abs(a - b); c <= a + b; c += 2) {
          const CGBlock& blk = cg_block(Spin(a), Spin(b), Spin(c));
          for (int ia = 0; ia <= a; ++ia)
            for (int ib = 0; ib <= b; ++ib)
              for (int ia2 = 0; ia2 <= a; ++ia2)
                for (int ib2 = 0; ib2 <= b; ++ib2)
                  for (int ic = 0; ic <= c; ++ic)
                    acc(ia * (b + 1) + ib, ia2 * (b + 1) + ib2) +=
                        blk.at(ia, ib, ic) * blk.at(ia2, ib2, ic);
        }
        worst = std::max(worst,
                         (acc - Eigen::MatrixXd::Identity(maxdim, maxdim)).cwiseAbs().maxCoeff());
        inst += maxdim * maxdim;
      }
    rep.properties.push_back(prop("cg_orthogonality_spins_le_3", inst, worst, 1e-12));
  }

  {  // CG swap symmetry against swap_r, spins <= 2
    double worst = 0;
    long inst = 0;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b)
        for (int c = std::abs(a - b); c <= a + b; c += 2) {
          const CGBlock& ab = cg_block(Spin(a), Spin(b), Spin(c));
          const CGBlock& ba = cg_block(Spin(b), Spin(a), Spin(c));
          const double r = swap_r(Spin(a), Spin(b), Spin(c));
          for (int ia = 0; ia <= a; ++ia)
            for (int ib = 0; ib <= b; ++ib)
              for (int ic = 0; ic <= c; ++ic) {
                worst = std::max(worst,
                                 std::abs(ba.at(ib, ia, ic) - r * ab.at(ia, ib, ic)));
                ++inst;
              }
        }
    rep.properties.push_back(prop("cg_swap_symmetry_spins_le_2", inst, worst, 1e-12));
  }

  {  // closed-form F equals the brute-force CG contraction, spins <= 2
    double worst = 0;
    long inst = 0;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b)
        for (int c = 0; c <= 4; ++c)
          for (int d = 0; d <= 4; ++d)
            for (int e = 0; e <= 4; ++e)
              for (int f = 0; f <= 4; ++f) {
                const double closed =
                    recoupling_f(Spin(a), Spin(b), Spin(c), Spin(d), Spin(e), Spin(f));
                const double oracle = f_by_cg_contraction(a, b, c, d, e, f);
                worst = std::max(worst, std::abs(closed - oracle));
                ++inst;
              }
    rep.properties.push_back(prop("recoupling_f_vs_cg_contraction_spins_le_2", inst,
                                  worst, 1e-10));
  }

  {  // generator algebra and Casimir for j <= 3
    double worst = 0;
    long inst = 0;
    for (int tj = 0; tj <= 6; ++tj) {
      const auto g = generators(Spin(tj));
      using M = Eigen::MatrixXcd;
      const std::complex<double> i1(0, 1);
      const M comm_xy = g.jx * g.jy - g.jy * g.jx - i1 * g.jz;
      const M comm_yz = g.jy * g.jz - g.jz * g.jy - i1 * g.jx;
      const M comm_zx = g.jz * g.jx - g.jx * g.jz - i1 * g.jy;
      const double jj = 0.25 * tj * (tj + 2);
      const M cas = g.jx * g.jx + g.jy * g.jy + g.jz * g.jz -
                    jj * M::Identity(tj + 1, tj + 1);
      worst = std::max({worst, comm_xy.cwiseAbs().maxCoeff(), comm_yz.cwiseAbs().maxCoeff(),
                        comm_zx.cwiseAbs().maxCoeff(), cas.cwiseAbs().maxCoeff()});
      inst += 4;
    }
    rep.properties.push_back(prop("generator_algebra_j_le_3", inst, worst, 1e-12));
  }

  return rep;
}

SuiteReport verify_tensors() {
  SuiteReport rep{"tensors", {}};
  auto su2 = su2_system();
  std::mt19937_64 rng(2024);

  {  // recoupling unitarity on random trees/permutations
    double worst = 0;
    long inst = 0;
    std::uniform_int_distribution<int> pick(0, 2);
    for (int it = 0; it < 40; ++it) {
      const int k = 3 + static_cast<int>(rng() % 3);  // 3..5 leaves
      std::vector<RepSpace> spaces;
      for (int l = 0; l < k; ++l) {
        std::vector<RepSpace::Sector> secs;
        for (int c = 0; c <= 3; ++c)
          if (rng() % 2) secs.push_back({c, 1 + static_cast<int>(rng() % 2)});
        if (secs.empty()) secs.push_back({1, 1});
        spaces.push_back(RepSpace(su2, secs));
      }
      std::vector<int> perm(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<int> inv(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
      const FusionTree comb = left_comb(k);
      const GammaMap g = gamma_permute(comb, perm, comb, spaces, 0);
      std::vector<RepSpace> pspaces;
      for (int i = 0; i < k; ++i)
        pspaces.push_back(spaces[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      const GammaMap gi = gamma_permute(comb, inv, comb, pspaces, 0);
      const GammaMap id = gi.composed_after(g);
      for (std::size_t i = 0; i < id.in_paths().size(); ++i)
        for (const auto& t : id.table()[i]) {
          const double want =
              id.out_paths()[static_cast<std::size_t>(t.out_path)] == id.in_paths()[i]
                  ? 1.0
                  : 0.0;
          worst = std::max(worst, std::abs(t.coeff - want));
          ++inst;
        }
    }
    rep.properties.push_back(prop("gamma_round_trip_identity", inst, worst, 1e-10));
  }

  {  // dense-oracle commuting square for permute on random invariant tensors
    double worst = 0;
    long inst = 0;
    for (int it = 0; it < 10; ++it) {
      RepSpace v = make_space(su2, {{0, 1 + static_cast<int>(rng() % 2)}, {1, 1}, {2, 1}});
      const int k = 3 + static_cast<int>(rng() % 2);
      std::vector<RepSpace> spaces(static_cast<std::size_t>(k), v);
      std::vector<Direction> dirs;
      for (int l = 0; l < k; ++l)
        dirs.push_back(rng() % 2 ? Direction::In : Direction::Out);
      SymTensor t = random_invariant(spaces, dirs, left_comb(k), 0, rng);
      std::vector<int> perm(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      const DenseTensorD ref = dense_permute(to_dense(t), perm);
      const DenseTensorD got = to_dense(permute(t, perm, left_comb(k)));
      worst = std::max(worst, (got - ref).norm());
      ++inst;
    }
    rep.properties.push_back(prop("permute_dense_commuting_square", inst, worst, 1e-10));
  }

  {  // deterministic compression counts of the reference spaces: the rank-2
     // configuration stores 11 of 225 coefficients; the rank-3 enumeration
     // yields 15 sector blocks holding 95 of 3375
    RepSpace v = make_space(su2, {{0, 1}, {2, 3}, {4, 1}});
    SymTensor t2({v, v}, {Direction::Out, Direction::Out}, left_comb(2), 0);
    long stored2 = 0;
    for (const auto& p : t2.allowed_paths()) stored2 += path_degeneracy(p, {v, v});
    SymTensor t3({v, v, v}, {Direction::Out, Direction::Out, Direction::Out},
                 left_comb(3), 0);
    long stored3 = 0, paths3 = 0;
    for (const auto& p : t3.allowed_paths()) {
      stored3 += path_degeneracy(p, {v, v, v});
      ++paths3;
    }
    const bool ok = stored2 == 11 && v.total_dim() * v.total_dim() == 225 &&
                    paths3 == 15 && stored3 == 95 &&
                    static_cast<long>(v.total_dim()) * v.total_dim() * v.total_dim() ==
                        3375;
    rep.properties.push_back({"compression_counts_rank2_and_rank3", 2,
                              ok ? 0.0 : 1.0, 0.5, ok});
  }

  return rep;
}

SuiteReport verify_linalg() {
  SuiteReport rep{"linalg", {}};
  auto su2 = su2_system();
  std::mt19937_64 rng(7);

  {  // blockwise matmul / svd / eig against the dense oracle
    double worst = 0;
    RepSpace v = make_space(su2, {{0, 4}, {2, 3}, {4, 2}});
    const DenseTensorD md = random_invariant_operator_dense(v, rng);
    const DenseTensorD nd = random_invariant_operator_dense(v, rng);
    auto mt = from_dense(md, {v, v}, {Direction::In, Direction::Out}, left_comb(2), 0);
    auto nt = from_dense(nd, {v, v}, {Direction::In, Direction::Out}, left_comb(2), 0);
    BlockDiagMatrix m = tree_to_blockdiag(mt.tensor);
    BlockDiagMatrix n = tree_to_blockdiag(nt.tensor);
    const Eigen::MatrixXd prod = matmul(m, n).dense();
    const Eigen::MatrixXd ref = m.dense() * n.dense();
    worst = std::max(worst, (prod - ref).cwiseAbs().maxCoeff());

    const BlockSvd dec = svd(m);
    // dense singular values equal blockwise values with multiplicity dim(c)
    std::vector<double> blockvals;
    for (const auto& [c, vals] : dec.values)
      for (int i = 0; i < vals.size(); ++i)
        for (int r = 0; r <= c; ++r) blockvals.push_back(vals[i]);
    std::sort(blockvals.rbegin(), blockvals.rend());
    Eigen::JacobiSVD<Eigen::MatrixXd> ds(m.dense());
    for (int i = 0; i < ds.singularValues().size(); ++i)
      worst = std::max(worst, std::abs(ds.singularValues()[i] -
                                       blockvals[static_cast<std::size_t>(i)]));

    // symmetric eig spectra match with multiplicity
    BlockDiagMatrix sym(v, v);
    for (const auto& [c, b] : m.blocks())
      sym.set_block(c, Eigen::MatrixXd(0.5 * (b + b.transpose())));
    const BlockEig be = eig(sym);
    std::vector<double> evals;
    for (const auto& [c, vals] : be.values)
      for (int i = 0; i < vals.size(); ++i)
        for (int r = 0; r <= c; ++r) evals.push_back(vals[i]);
    std::sort(evals.begin(), evals.end());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> de(sym.dense());
    for (int i = 0; i < de.eigenvalues().size(); ++i)
      worst = std::max(worst,
                       std::abs(de.eigenvalues()[i] - evals[static_cast<std::size_t>(i)]));
    rep.properties.push_back(prop("blockwise_matmul_svd_eig_vs_dense", 3, worst, 1e-10));
  }

  {  // flop counter reproduces the dense/blockwise ratio formula
    bool ok = true;
    for (int q = 2; q <= 4; ++q) {
      const int d = 5;
      std::vector<RepSpace::Sector> secs;
      for (int i = 1; i <= q; ++i) secs.push_back({2 * i - 1, d});
      RepSpace v(su2, secs);
      const long p = v.total_dim() / d;
      BlockDiagMatrix m(v, v), n(v, v);
      for (const auto& s : v.sectors()) {
        m.set_block(s.charge, Eigen::MatrixXd::Random(d, d));
        n.set_block(s.charge, Eigen::MatrixXd::Random(d, d));
      }
      counters::reset();
      matmul(m, n);
      const auto snap = counters::snapshot();
      const long block_flops = snap.matmul_flops;
      const long dense_flops = static_cast<long>(d) * p * d * p * d * p;
      ok = ok && block_flops == static_cast<long>(q) * d * d * d;
      ok = ok && p == static_cast<long>(q) * q + q;
      ok = ok && dense_flops * q == block_flops * p * p * p;  // ratio (q^2+q)^3 / q
    }
    rep.properties.push_back({"matmul_flop_ratio_formula_q_2_4", 3, ok ? 0.0 : 1.0, 0.5, ok});
  }

  {  // truncation policy
    RepSpace row = make_space(su2, {{0, 1}, {2, 1}});
    BlockDiagMatrix m(row, row);
    m.set_block(0, Eigen::MatrixXd::Constant(1, 1, 0.9));
    m.set_block(2, Eigen::MatrixXd::Constant(1, 1, 0.8));
    const auto dec = svd(m);
    const auto tr = truncate(dec, 3);
    const bool ok = tr.kept.total_dim() == 1 && tr.kept.degeneracy(0) == 1 &&
                    tr.kept.degeneracy(2) == 0;
    rep.properties.push_back({"truncate_multiplet_greedy_policy", 1, ok ? 0.0 : 1.0, 0.5, ok});
  }

  return rep;
}

SuiteReport verify_models() {
  SuiteReport rep{"models", {}};
  using namespace models;

  {  // gate spectrum and invariance
    const SymTensor gate = heisenberg_gate(spin_half_site());
    const BlockDiagMatrix blocks = heisenberg_coupled_blocks(spin_half_site());
    double worst = std::abs((*blocks.block(0))(0, 0) + 3.0);
    worst = std::max(worst, std::abs((*blocks.block(2))(0, 0) - 1.0));
    worst = std::max(worst, invariance_residual(gate));
    rep.properties.push_back(prop("heisenberg_gate_eigenvalues_and_invariance", 3, worst,
                                  1e-12));
  }

  {  // blocked vs dense exact diagonalization, L = 8 ring
    EdOptions o;
    o.num_sites = 8;
    o.periodic = true;
    o.site = spin_half_site();
    const auto blocked = exact_diag_blocked(o).flattened();
    const Eigen::VectorXd dense = exact_diag_dense(o);
    double worst = 0;
    for (long i = 0; i < dense.size(); ++i)
      worst = std::max(worst, std::abs(blocked[static_cast<std::size_t>(i)] - dense[i]));
    rep.properties.push_back(prop("ed_blocked_vs_dense_L8_ring", dense.size(), worst, 1e-9));
  }

  {  // short MERA run: monotone energy, isometries, invariance
    MeraConfig cfg;
    cfg.layers = 1;
    cfg.bonds = {make_space(su2_system(), {{0, 1}, {2, 1}})};
    cfg.top_charge = 0;
    cfg.chi_top = 1;
    cfg.seed = 7;
    MeraState st = mera_build(cfg);
    const SymTensor gate = heisenberg_gate(blocked_site());
    const MeraTrace tr = mera_optimize(st, gate, 10);
    double viol = 0;
    for (std::size_t i = 1; i < tr.energies.size(); ++i)
      viol = std::max(viol, tr.energies[i] - tr.energies[i - 1]);
    double worst = std::max(
        {viol, isometry_residual(st.u[0], 2), isometry_residual(st.w[0], 3),
         isometry_residual(st.top, 2), invariance_residual(st.u[0]),
         invariance_residual(st.w[0]), invariance_residual(st.top)});
    rep.properties.push_back(prop("mera_short_run_monotone_isometric_invariant",
                                  static_cast<long>(tr.energies.size()), worst, 1e-8));
  }

  return rep;
}

std::vector<SuiteReport> verify_all() {
  return {verify_kernels(), verify_tensors(), verify_linalg(), verify_models()};
}

}  // namespace symtensor::verify
