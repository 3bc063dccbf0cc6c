// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "symtensor/counters.hpp"
#include "symtensor/serialize.hpp"

using namespace symtensor;
using doctest::Approx;

TEST_CASE("identity recoupling is the identity map") {
  auto su2 = su2_system();
  RepSpace v = make_space(su2, {{0, 1}, {1, 2}, {2, 1}});
  const FusionTree comb = left_comb(3);
  const GammaMap g = gamma_recouple(comb, comb, {v, v, v}, 0);
  for (std::size_t i = 0; i < g.in_paths().size(); ++i) {
    REQUIRE(g.table()[i].size() == 1);
    CHECK(g.out_paths()[static_cast<std::size_t>(g.table()[i][0].out_path)] ==
          g.in_paths()[i]);
    CHECK(g.table()[i][0].coeff == Approx(1.0));
  }
}

TEST_CASE("three-leaf recoupling coefficients are the raw F values") {
  auto su2 = su2_system();
  std::mt19937_64 rng(3);
  for (int it = 0; it < 8; ++it) {
    RepSpace a = testing::random_su2_space(rng, 3, 1);
    RepSpace b = testing::random_su2_space(rng, 3, 1);
    RepSpace c = testing::random_su2_space(rng, 3, 1);
    const FusionTree t1 = left_comb(3);
    const FusionTree t2(3, {{1, 2}, {0, 3}});
    for (Charge root : {0, 1, 2, 3}) {
      const auto in_paths = enumerate_paths(t1, {a, b, c}, root);
      if (in_paths.empty()) continue;
      const GammaMap g = gamma_recouple(t1, t2, {a, b, c}, root);
      for (const auto& pin : in_paths)
        for (const auto& pout : enumerate_paths(t2, {a, b, c}, root)) {
          if (pin.leaves != pout.leaves) continue;
          const double want = recoupling_f(
              Spin(pin.leaves[0]), Spin(pin.leaves[1]), Spin(pin.leaves[2]), Spin(root),
              Spin(pin.internals[0]), Spin(pout.internals[0]));
          CHECK(g.coefficient(pin, pout) == Approx(want).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("four-leaf recoupling factorizes into two F moves") {
  // tau = (((0,1),2),3) versus tau' = (0,(1,(2,3))): the coefficient from a
  // path with internals (e1, e2) to one with internals (f1, f2) is the
  // product F^{e2 f1}_{e1 j2 j3 r} * F^{e1 f2}_{j0 j1 f1 r}.
  auto su2 = su2_system();
  RepSpace h = make_space(su2, {{1, 1}, {2, 1}});
  const FusionTree tau = left_comb(4);
  const FusionTree tau2(4, {{2, 3}, {1, 4}, {0, 5}});
  const std::vector<RepSpace> spaces{h, h, h, h};
  for (Charge root : {0, 1, 2}) {
    const auto in_paths = enumerate_paths(tau, spaces, root);
    if (in_paths.empty()) continue;
    const GammaMap g = gamma_recouple(tau, tau2, spaces, root);
    for (const auto& pin : in_paths)
      for (const auto& pout : enumerate_paths(tau2, spaces, root)) {
        if (pin.leaves != pout.leaves) continue;
        const Charge e1 = pin.internals[0], e2 = pin.internals[1];
        const Charge f1 = pout.internals[0], f2 = pout.internals[1];
        const double want =
            recoupling_f(Spin(e1), Spin(pin.leaves[2]), Spin(pin.leaves[3]), Spin(root),
                         Spin(e2), Spin(f1)) *
            recoupling_f(Spin(pin.leaves[0]), Spin(pin.leaves[1]), Spin(f1), Spin(root),
                         Spin(e1), Spin(f2));
        CHECK(g.coefficient(pin, pout) == Approx(want).epsilon(1e-11));
      }
  }
}

TEST_CASE("the four-leaf two-F product identity") {
  // tau = (((0,1),2),3), tau' = ((0,1),(2,3)): exactly one F move relates
  // them, so S = F; and tau'' = ((0,(1,2)),3) needs one move on the first
  // three legs. Compose both to pin the product form of a generic pair.
  auto su2 = su2_system();
  RepSpace h = make_space(su2, {{1, 1}, {2, 1}});
  const std::vector<RepSpace> spaces{h, h, h, h};
  const FusionTree tau = left_comb(4);
  const FusionTree pair_tree(4, {{0, 1}, {2, 3}, {4, 5}});
  for (Charge root : {0, 1, 2}) {
    const GammaMap g = gamma_recouple(tau, pair_tree, spaces, root);
    for (const auto& pin : g.in_paths())
      for (const auto& pout : g.out_paths()) {
        if (pin.leaves != pout.leaves) continue;
        if (pin.internals[0] != pout.internals[0]) {
          CHECK(g.coefficient(pin, pout) == Approx(0.0).epsilon(1e-12));
          continue;
        }
        const double want = recoupling_f(
            Spin(pin.internals[0]), Spin(pin.leaves[2]), Spin(pin.leaves[3]),
            Spin(root), Spin(pin.internals[1]), Spin(pout.internals[1]));
        CHECK(g.coefficient(pin, pout) == Approx(want).epsilon(1e-11));
      }
  }
}

TEST_CASE("pairwise swap at a shared node uses the swap factor") {
  auto su2 = su2_system();
  RepSpace h = make_space(su2, {{1, 1}});
  const GammaMap g = gamma_permute(left_comb(2), {1, 0}, left_comb(2), {h, h}, 0);
  SectorPath p;
  p.leaves = {1, 1};
  p.internals = {0};
  CHECK(g.coefficient(p, p) == Approx(-1.0));
  const GammaMap g1 = gamma_permute(left_comb(2), {1, 0}, left_comb(2), {h, h}, 2);
  SectorPath p1;
  p1.leaves = {1, 1};
  p1.internals = {2};
  CHECK(g1.coefficient(p1, p1) == Approx(1.0));
}

TEST_CASE("permutation maps are independent of the swap decomposition") {
  auto su2 = su2_system();
  std::mt19937_64 rng(5);
  RepSpace a = make_space(su2, {{1, 1}, {2, 1}});
  const std::vector<RepSpace> spaces{a, a, a, a};
  const FusionTree comb = left_comb(4);
  // p = (2 3) swap, built in one go versus via two half-permutations
  const std::vector<int> swap23{0, 2, 1, 3};
  const GammaMap direct = gamma_permute(comb, swap23, comb, spaces, 0);
  const std::vector<int> cyc{1, 2, 0, 3};     // rotate first three left
  const std::vector<int> undo{2, 1, 0, 3};    // and back with the swap folded in
  std::vector<RepSpace> mid_spaces{a, a, a, a};
  const GammaMap g1 = gamma_permute(comb, cyc, comb, spaces, 0);
  const GammaMap g2 = gamma_permute(comb, undo, comb, mid_spaces, 0);
  const GammaMap composed = g2.composed_after(g1);
  // composed realizes legs[undo[cyc[l]]]: undo o cyc = (0,2,1,3) = swap23
  REQUIRE(composed.perm() == swap23);
  for (const auto& pin : direct.in_paths())
    for (const auto& pout : direct.out_paths())
      CHECK(composed.coefficient(pin, pout) ==
            Approx(direct.coefficient(pin, pout)).epsilon(1e-10));
}

TEST_CASE("gamma unitarity on random instances") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 30; ++it) {
    const int k = 2 + static_cast<int>(rng() % 4);  // up to 5 leaves
    std::vector<RepSpace> spaces;
    for (int l = 0; l < k; ++l) spaces.push_back(testing::random_su2_space(rng, 3, 2));
    const auto perm = testing::random_perm(rng, k);
    std::vector<int> inv(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    std::vector<RepSpace> pspaces;
    for (int i = 0; i < k; ++i) pspaces.push_back(spaces[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    const FusionTree comb = left_comb(k);
    const GammaMap g = gamma_permute(comb, perm, comb, spaces, 0);
    const GammaMap gi = gamma_permute(comb, inv, comb, pspaces, 0);
    const GammaMap id = gi.composed_after(g);
    for (std::size_t i = 0; i < id.in_paths().size(); ++i)
      for (const auto& t : id.table()[i]) {
        const double want =
            id.out_paths()[static_cast<std::size_t>(t.out_path)] == id.in_paths()[i]
                ? 1.0
                : 0.0;
        CHECK(t.coeff == Approx(want).epsilon(1e-10));
      }
    // sparsity: stored paths obey the fusion rules (set_block would throw)
    for (const auto& p : g.out_paths()) {
      auto lc = [&](int id2) {
        return id2 < k ? p.leaves[static_cast<std::size_t>(id2)]
                       : p.internals[static_cast<std::size_t>(id2 - k)];
      };
      for (int n = 0; n < comb.node_count(); ++n)
        CHECK(su2_system()->fusible(lc(comb.nodes()[static_cast<std::size_t>(n)].left),
                                    lc(comb.nodes()[static_cast<std::size_t>(n)].right),
                                    lc(k + n)));
    }
  }
}

TEST_CASE("z2 fermion permutes carry the exchange signs") {
  auto z2 = z2_fermion_system();
  RepSpace p = RepSpace(z2, {{0, 1}, {1, 1}});
  const GammaMap g = gamma_permute(left_comb(2), {1, 0}, left_comb(2), {p, p}, 0);
  SectorPath odd;
  odd.leaves = {1, 1};
  odd.internals = {0};
  SectorPath even;
  even.leaves = {0, 0};
  even.internals = {0};
  CHECK(g.coefficient(odd, odd) == Approx(-1.0));
  CHECK(g.coefficient(even, even) == Approx(1.0));
  // u1 permutes are pure re-indexings
  auto u1 = u1_system();
  RepSpace n = RepSpace(u1, {{-1, 1}, {0, 1}, {1, 1}});
  const GammaMap gu = gamma_permute(left_comb(3), {2, 0, 1}, left_comb(3), {n, n, n}, 0);
  for (std::size_t i = 0; i < gu.in_paths().size(); ++i)
    for (const auto& t : gu.table()[i]) CHECK(std::abs(t.coeff) == Approx(1.0));
}

TEST_CASE("evaluate_spin_network reproduces loops and F products") {
  auto su2 = su2_system();
  RepSpace h = make_space(su2, {{1, 1}});
  {  // the split-then-fuse loop evaluates to one
    SectorPath p;
    p.leaves = {1, 1};
    p.internals = {0};
    CHECK(evaluate_spin_network(left_comb(2), p, {0, 1}, left_comb(2), p, {h, h}) ==
          Approx(1.0));
  }
  {  // the two-tree three-leaf network evaluates to the recoupling coefficient
    const FusionTree t2(3, {{1, 2}, {0, 3}});
    SectorPath in, out;
    in.leaves = {1, 1, 1};
    in.internals = {0, 1};
    out.leaves = {1, 1, 1};
    out.internals = {2, 1};
    CHECK(evaluate_spin_network(left_comb(3), in, {0, 1, 2}, t2, out, {h, h, h}) ==
          Approx(recoupling_f(Spin(1), Spin(1), Spin(1), Spin(1), Spin(0), Spin(2))));
  }
  {  // four leaves: the value equals the product of the two pairwise moves
    const FusionTree pair_tree(4, {{0, 1}, {2, 3}, {4, 5}});
    SectorPath in, out;
    in.leaves = {1, 1, 1, 1};
    in.internals = {0, 1, 0};
    out.leaves = {1, 1, 1, 1};
    out.internals = {0, 0, 0};
    const double want =
        recoupling_f(Spin(0), Spin(1), Spin(1), Spin(0), Spin(1), Spin(0));
    CHECK(evaluate_spin_network(left_comb(4), in, {0, 1, 2, 3}, pair_tree, out,
                                {h, h, h, h}) == Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("reversal factors") {
  auto su2 = su2_system();
  CHECK(reversal_factor(*su2, 2, Direction::Out, Direction::In) ==
        Approx(1 / std::sqrt(3.0)));
  CHECK(reversal_factor(*su2, 2, Direction::In, Direction::Out) == Approx(std::sqrt(3.0)));
  CHECK(reversal_factor(*su2, 0, Direction::Out, Direction::In) == Approx(1.0));
  CHECK(reversal_factor(*su2, 1, Direction::In, Direction::InR) == Approx(-1.0));
  CHECK(reversal_factor(*su2, 2, Direction::In, Direction::InR) == Approx(1.0));
  CHECK(reversal_factor(*u1_system(), 5, Direction::Out, Direction::In) == Approx(1.0));
}

TEST_CASE("precompute cache: memory hits, instrumentation, disk round trip") {
  auto su2 = su2_system();
  RepSpace v = make_space(su2, {{0, 1}, {1, 1}, {2, 2}});
  const std::vector<RepSpace> spaces{v, v, v, v};
  const FusionTree comb = left_comb(4);
  const FusionTree other(4, {{1, 2}, {0, 4}, {5, 3}});
  GammaCache cache;

  counters::reset();
  auto g1 = cache.get_or_build(comb, {0, 1, 2, 3}, other, spaces, 0);
  const auto after_build = counters::snapshot();
  CHECK(after_build.gamma_builds >= 1);
  CHECK(after_build.spin_networks_evaluated > 0);

  auto g2 = cache.get_or_build(comb, {0, 1, 2, 3}, other, spaces, 0);
  const auto after_hit = counters::snapshot();
  CHECK(g2.get() == g1.get());
  CHECK(after_hit.gamma_cache_hits == after_build.gamma_cache_hits + 1);
  CHECK(after_hit.spin_networks_evaluated == after_build.spin_networks_evaluated);

  // disk persistence through a fresh cache
  const std::string dir = "gamma_cache_test_dir";
  std::filesystem::remove_all(dir);
  {
    GammaCache disk1(dir);
    (void)disk1.get_or_build(comb, {0, 1, 2, 3}, other, spaces, 0);
  }
  {
    GammaCache disk2(dir);
    counters::reset();
    auto g3 = disk2.get_or_build(comb, {0, 1, 2, 3}, other, spaces, 0);
    const auto snap = counters::snapshot();
    CHECK(snap.gamma_disk_hits == 1);
    CHECK(snap.spin_networks_evaluated == 0);
    CHECK(g3->stored_coefficients() == g1->stored_coefficients());
    for (std::size_t i = 0; i < g1->in_paths().size(); ++i)
      for (const auto& t : g1->table()[i])
        CHECK(g3->coefficient(g1->in_paths()[i],
                              g1->out_paths()[static_cast<std::size_t>(t.out_path)]) ==
              Approx(t.coeff).epsilon(1e-14));
  }
  {  // corrupted file: warn and rebuild
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      std::ofstream os(entry.path());
      os << "{ corrupt";
    }
    GammaCache disk3(dir);
    counters::reset();
    auto g4 = disk3.get_or_build(comb, {0, 1, 2, 3}, other, spaces, 0);
    const auto snap = counters::snapshot();
    CHECK(snap.gamma_builds == 1);  // rebuilt
    CHECK(g4->stored_coefficients() == g1->stored_coefficients());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("spin-network counts grow with leaf count and spins per index") {
  auto su2 = su2_system();
  auto count_for = [&](int k, int nspins) {
    std::vector<RepSpace::Sector> secs;
    for (int c = 0; c < nspins; ++c) secs.push_back({c, 1});
    RepSpace v(su2, secs);
    std::vector<RepSpace> spaces(static_cast<std::size_t>(k), v);
    counters::reset();
    const FusionTree t2 = [&] {
      // fully right-leaning tree: maximal recoupling distance from the comb
      std::vector<FusionTree::Node> nodes;
      int line = k - 1;
      for (int l = k - 2; l >= 0; --l) {
        nodes.push_back({l, line});
        line = k + static_cast<int>(nodes.size()) - 1;
      }
      return FusionTree(k, std::move(nodes));
    }();
    (void)gamma_recouple(left_comb(k), t2, spaces, 0);
    return counters::snapshot().spin_networks_evaluated;
  };
  CHECK(count_for(4, 2) > count_for(3, 2));
  CHECK(count_for(5, 2) > count_for(4, 2));
  CHECK(count_for(4, 3) > count_for(4, 2));
}
