// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "symtensor/fusion_tree.hpp"

using namespace symtensor;
using doctest::Approx;

TEST_CASE("charge systems: fusion rules and structural data") {
  auto su2 = su2_system();
  CHECK(su2->fuse(1, 1) == std::vector<Charge>{0, 2});
  CHECK(su2->fuse(2, 2) == std::vector<Charge>{0, 2, 4});
  CHECK(su2->fuse(3, 0) == std::vector<Charge>{3});
  CHECK(su2->dim(2) == 3);

  auto u1 = u1_system();
  CHECK(u1->fuse(2, -3) == std::vector<Charge>{-1});
  CHECK(u1->dim(-7) == 1);
  CHECK(u1->f_coeff(1, 2, 3, 6, 3, 5) == Approx(1.0));
  CHECK(u1->dual(4) == -4);

  auto z2 = z2_fermion_system();
  CHECK(z2->fuse(1, 1) == std::vector<Charge>{0});
  CHECK(z2->fuse(0, 1) == std::vector<Charge>{1});
  CHECK(z2->r_coeff(1, 1, 0) == Approx(-1.0));
  CHECK(z2->r_coeff(0, 1, 1) == Approx(1.0));
  CHECK(z2->r_coeff(1, 0, 1) == Approx(1.0));
  CHECK(z2->f_coeff(1, 1, 1, 1, 0, 0) == Approx(1.0));

  CHECK(charge_system_by_name("su2")->name() == "su2");
  CHECK_THROWS(charge_system_by_name("su3"));
}

TEST_CASE("fuse associativity as a set map, all systems") {
  std::mt19937_64 rng(3);
  for (const auto& sys : {su2_system(), u1_system(), z2_fermion_system()}) {
    for (int it = 0; it < 50; ++it) {
      Charge a, b, c;
      if (sys->name() == "su2") {
        a = static_cast<Charge>(rng() % 5);
        b = static_cast<Charge>(rng() % 5);
        c = static_cast<Charge>(rng() % 5);
      } else if (sys->name() == "u1") {
        a = static_cast<Charge>(rng() % 9) - 4;
        b = static_cast<Charge>(rng() % 9) - 4;
        c = static_cast<Charge>(rng() % 9) - 4;
      } else {
        a = static_cast<Charge>(rng() % 2);
        b = static_cast<Charge>(rng() % 2);
        c = static_cast<Charge>(rng() % 2);
      }
      std::set<Charge> left, right;
      for (Charge ab : sys->fuse(a, b))
        for (Charge abc : sys->fuse(ab, c)) left.insert(abc);
      for (Charge bc : sys->fuse(b, c))
        for (Charge abc : sys->fuse(a, bc)) right.insert(abc);
      CHECK(left == right);
    }
  }
}

TEST_CASE("z2 double swap is trivial") {
  auto z2 = z2_fermion_system();
  for (Charge a : {0, 1})
    for (Charge b : {0, 1}) {
      const Charge c = (a + b) % 2;
      CHECK(z2->r_coeff(a, b, c) * z2->r_coeff(b, a, c) == Approx(1.0));
    }
}

TEST_CASE("su2 F-unitarity over compatible labels, spins up to 2") {
  auto su2 = su2_system();
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int c = 0; c <= 4; ++c)
        for (int d = 0; d <= 4; ++d)
          for (Charge f1 : su2->fuse(b, c))
            for (Charge f2 : su2->fuse(b, c)) {
              if (!su2->fusible(a, f1, d) || !su2->fusible(a, f2, d)) continue;
              double s = 0;
              for (Charge e : su2->fuse(a, b))
                s += su2->f_coeff(a, b, c, d, e, f1) * su2->f_coeff(a, b, c, d, e, f2);
              CHECK(s == Approx(f1 == f2 ? 1.0 : 0.0).epsilon(1e-11));
            }
}

TEST_CASE("rep spaces: construction rules and dimension bookkeeping") {
  auto su2 = su2_system();
  CHECK_THROWS(make_space(su2, {{0, 0}}));             // zero degeneracy forbidden
  CHECK_THROWS(make_space(su2, {{2, 1}, {0, 1}}));      // order must ascend
  CHECK_THROWS(make_space(su2, {{-1, 1}}));             // invalid charge
  RepSpace v = make_space(su2, {{0, 2}, {1, 3}, {4, 1}});
  CHECK(v.total_dim() == 2 + 6 + 5);
  CHECK(v.sector_offset(1) == 2);
  CHECK(v.sector_offset(4) == 8);
  CHECK(v.degeneracy(2) == 0);

  RepSpace u = make_space(u1_system(), {{-2, 1}, {0, 2}, {3, 1}});
  RepSpace ud = u.dual();
  CHECK(ud.sectors()[0].charge == -3);
  CHECK(ud.degeneracy(2) == 1);
  CHECK(ud.degeneracy(0) == 2);
}

TEST_CASE("fuse_spaces reproduces the worked products") {
  auto su2 = su2_system();
  {  // half times half
    RepSpace h = make_space(su2, {{1, 1}});
    auto [prod, x] = fuse_spaces(h, h);
    CHECK(prod.sectors().size() == 2);
    CHECK(prod.degeneracy(0) == 1);
    CHECK(prod.degeneracy(2) == 1);
  }
  {  // threefold degenerate halves: d = 9 at both total spins
    RepSpace h3 = make_space(su2, {{1, 3}});
    auto [prod, x] = fuse_spaces(h3, h3);
    CHECK(prod.degeneracy(0) == 9);
    CHECK(prod.degeneracy(2) == 9);
    // the first coupled label pairs the first degeneracy labels
    CHECK(x.source(0, 0) == FuseMap::SourcePair{1, 0, 1, 0});
    CHECK(x.source(0, 1) == FuseMap::SourcePair{1, 0, 1, 1});
    CHECK(x.source(0, 3) == FuseMap::SourcePair{1, 1, 1, 0});
    CHECK(x.coupled_index(2, {1, 2, 1, 2}) == 8);
  }
  {  // (j=1,d=1) x (j=0 d=2 + j=1 d=1): d = (1,3,1) at j = 0,1,2
    RepSpace a = make_space(su2, {{2, 1}});
    RepSpace b = make_space(su2, {{0, 2}, {2, 1}});
    auto [prod, x] = fuse_spaces(a, b);
    CHECK(prod.degeneracy(0) == 1);
    CHECK(prod.degeneracy(2) == 3);
    CHECK(prod.degeneracy(4) == 1);
    // normative ordering at total spin 1: (1,1;0,1), (1,1;0,2), (1,1;1,1)
    CHECK(x.source(2, 0) == FuseMap::SourcePair{2, 0, 0, 0});
    CHECK(x.source(2, 1) == FuseMap::SourcePair{2, 0, 0, 1});
    CHECK(x.source(2, 2) == FuseMap::SourcePair{2, 0, 2, 0});
    // inverse lookup round trip
    for (const auto& s : prod.sectors())
      for (int t = 0; t < s.degeneracy; ++t)
        CHECK(x.coupled_index(s.charge, x.source(s.charge, t)) == t);
  }
  {  // dimension product invariant on random spaces
    std::mt19937_64 rng(11);
    for (int it = 0; it < 20; ++it) {
      RepSpace a = testing::random_su2_space(rng, 4, 3);
      RepSpace b = testing::random_su2_space(rng, 4, 3);
      auto [prod, x] = fuse_spaces(a, b);
      CHECK(prod.total_dim() == a.total_dim() * b.total_dim());
      long assigned = 0;
      for (const auto& s : prod.sectors()) assigned += s.degeneracy;
      long pairs = 0;
      for (const auto& sa : a.sectors())
        for (const auto& sb : b.sectors())
          pairs += static_cast<long>(sa.degeneracy) * sb.degeneracy *
                   static_cast<long>(a.system()->fuse(sa.charge, sb.charge).size());
      CHECK(assigned == pairs);  // bijection: nothing dropped or duplicated
    }
  }
  {  // u1 split enumerates the additive decompositions
    RepSpace n = make_space(u1_system(), {{0, 1}, {1, 1}});
    auto [prod, x] = fuse_spaces(n, n);
    CHECK(prod.degeneracy(1) == 2);
    CHECK(x.source(1, 0) == FuseMap::SourcePair{0, 0, 1, 0});
    CHECK(x.source(1, 1) == FuseMap::SourcePair{1, 0, 0, 0});
  }
  CHECK_THROWS(fuse_spaces(make_space(su2, {{0, 1}}), make_space(u1_system(), {{0, 1}})));
}

TEST_CASE("total spin operators and the coupled-sector Casimir") {
  auto su2 = su2_system();
  {  // two spin-half sites: total Jz eigenvalues {-1, 0, 0, 1}
    RepSpace h = make_space(su2, {{1, 1}});
    const auto ops = total_spin_operators({h, h});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dec(ops.jz);
    CHECK(dec.eigenvalues()[0] == Approx(-1.0));
    CHECK(dec.eigenvalues()[1] == Approx(0.0));
    CHECK(dec.eigenvalues()[2] == Approx(0.0));
    CHECK(dec.eigenvalues()[3] == Approx(1.0));
  }
  {  // single site reduces to the space generators
    RepSpace v = make_space(su2, {{0, 1}, {2, 1}});
    const auto ops = total_spin_operators({v});
    const auto g = space_generators(v);
    CHECK((ops.jx - g.jx).norm() == 0.0);
  }
  {  // reducible-space generators act as identity (x) irrep blocks
    RepSpace v = make_space(su2, {{1, 3}});
    const auto g = space_generators(v);
    const auto irr = real_generators(Spin(1));
    for (int t = 0; t < 3; ++t)
      CHECK((g.jx.block(2 * t, 2 * t, 2, 2) - irr.jx).norm() == 0.0);
    CHECK(g.jx.cwiseAbs().sum() == Approx(3 * irr.jx.cwiseAbs().sum()));
  }
  {  // total J^2 is block diagonal with eigenvalue j(j+1) per coupled sector
    std::mt19937_64 rng(5);
    for (int it = 0; it < 5; ++it) {
      RepSpace a = testing::random_su2_space(rng, 2, 2);
      RepSpace b = testing::random_su2_space(rng, 2, 2);
      if (a.total_dim() * b.total_dim() > 64) continue;
      const auto ops = total_spin_operators({a, b});
      const Eigen::MatrixXd j2 =
          ops.jx * ops.jx - ops.ijy * ops.ijy + ops.jz * ops.jz;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dec(j2);
      auto [prod, x] = fuse_spaces(a, b);
      std::vector<double> expected;
      for (const auto& s : prod.sectors()) {
        const double jj = 0.25 * s.charge * (s.charge + 2);
        for (int i = 0; i < s.degeneracy * (s.charge + 1); ++i) expected.push_back(jj);
      }
      std::sort(expected.begin(), expected.end());
      for (long i = 0; i < dec.eigenvalues().size(); ++i)
        CHECK(dec.eigenvalues()[i] ==
              Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }
  }
  CHECK_THROWS(total_spin_operators(
      {make_space(su2, {{1, 100}}), make_space(su2, {{1, 100}})}, 64));
}

TEST_CASE("fusion trees: construction and the left comb") {
  CHECK(left_comb(1).node_count() == 0);
  CHECK(left_comb(2).nodes() == std::vector<FusionTree::Node>{{0, 1}});
  CHECK(left_comb(3).nodes() == std::vector<FusionTree::Node>{{0, 1}, {3, 2}});
  CHECK(left_comb(5).root_id() == 8);
  CHECK_THROWS(FusionTree(3, {{0, 2}, {3, 1}}));  // non-adjacent fusion
  CHECK_THROWS(FusionTree(3, {{0, 1}}));          // wrong node count
  // arbitrary storage order is accepted when spans are consistent
  const FusionTree t(4, {{1, 2}, {4, 3}, {0, 5}});
  CHECK(t.span(5) == std::pair<int, int>{1, 4});
  CHECK(t.root_id() == 6);
}

TEST_CASE("sector path enumeration") {
  auto su2 = su2_system();
  RepSpace h = make_space(su2, {{1, 1}});
  {  // two half leaves, trivial root: exactly one path
    const auto paths = enumerate_paths(left_comb(2), {h, h}, 0);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].leaves == std::vector<Charge>{1, 1});
    CHECK(paths[0].internals == std::vector<Charge>{0});
  }
  {  // four halves on the comb, root 0: internal labels (0,1/2) and (1,1/2)
    const auto paths = enumerate_paths(left_comb(4), {h, h, h, h}, 0);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].internals == std::vector<Charge>{0, 1, 0});
    CHECK(paths[1].internals == std::vector<Charge>{2, 1, 0});
  }
  {  // u1 with three {0,1} leaves and root 2: three solutions
    RepSpace n = make_space(u1_system(), {{0, 1}, {1, 1}});
    const auto paths = enumerate_paths(left_comb(3), {n, n, n}, 2);
    CHECK(paths.size() == 3);
  }
}

TEST_CASE("path degeneracies and the rank-3 reference configuration") {
  auto su2 = su2_system();
  {
    RepSpace h3 = make_space(su2, {{1, 3}});
    SectorPath p;
    p.leaves = {1, 1};
    p.internals = {0};
    CHECK(path_degeneracy(p, {h3, h3}) == 9);
    RepSpace h = make_space(su2, {{1, 1}});
    CHECK(path_degeneracy(p, {h, h}) == 1);
  }
  {  // V0 + 3V1 + V2 on three legs: 15 sector blocks holding 95 coefficients
     // (the reference text miscounts this example; see the repository notes)
    RepSpace v = make_space(su2, {{0, 1}, {2, 3}, {4, 1}});
    const auto paths = enumerate_paths(left_comb(3), {v, v, v}, 0);
    CHECK(paths.size() == 15);
    long total = 0;
    for (const auto& p : paths) total += path_degeneracy(p, {v, v, v});
    CHECK(total == 95);
  }
}

TEST_CASE("path sums match the iterated fuse product per root charge") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 10; ++it) {
    const int k = 2 + static_cast<int>(rng() % 3);
    std::vector<RepSpace> spaces;
    for (int l = 0; l < k; ++l) spaces.push_back(testing::random_su2_space(rng, 3, 2));
    RepSpace acc = spaces[0];
    for (int l = 1; l < k; ++l) acc = fuse_spaces(acc, spaces[static_cast<std::size_t>(l)]).first;
    for (const auto& s : acc.sectors()) {
      long total = 0;
      for (const auto& p : enumerate_paths(left_comb(k), spaces, s.charge))
        total += path_degeneracy(p, spaces);
      CHECK(total == s.degeneracy);
    }
    // tree-shape invariance of the counts (k = 3: compare both shapes)
    if (k == 3) {
      const FusionTree alt(3, {{1, 2}, {0, 3}});
      for (const auto& s : acc.sectors()) {
        long t1 = 0, t2 = 0;
        for (const auto& p : enumerate_paths(left_comb(3), spaces, s.charge))
          t1 += path_degeneracy(p, spaces);
        for (const auto& p : enumerate_paths(alt, spaces, s.charge))
          t2 += path_degeneracy(p, spaces);
        CHECK(t1 == t2);
      }
    }
  }
}

TEST_CASE("tree layout positions compose the fuse maps") {
  auto su2 = su2_system();
  RepSpace a = make_space(su2, {{0, 2}, {2, 1}});
  RepSpace b = make_space(su2, {{1, 2}});
  RepSpace c = make_space(su2, {{1, 1}, {3, 1}});
  TreeLayout layout(left_comb(3), {a, b, c});
  auto [ab, xab] = fuse_spaces(a, b);
  auto [abc, xabc] = fuse_spaces(ab, c);
  CHECK(layout.coupled_space() == abc);
  for (const auto& s : abc.sectors()) {
    const auto& basis = layout.basis(s.charge);
    CHECK(static_cast<int>(basis.size()) == s.degeneracy);
    for (int t = 0; t < s.degeneracy; ++t) {
      const auto& src = xabc.source(s.charge, t);
      const auto& inner = xab.source(src.ca, src.ta);
      const auto& entry = basis[static_cast<std::size_t>(t)];
      const auto& path = layout.paths(s.charge)[static_cast<std::size_t>(entry.path_index)];
      CHECK(path.leaves == std::vector<Charge>{inner.ca, inner.cb, src.cb});
      CHECK(path.internals[0] == src.ca);
      CHECK(entry.ts == std::vector<int>{inner.ta, inner.tb, src.tb});
      CHECK(layout.position(s.charge, path, entry.ts) == t);
    }
  }
}
