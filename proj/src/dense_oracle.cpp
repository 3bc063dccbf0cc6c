// SPDX-License-Identifier: Apache-2.0
#include "symtensor/dense_oracle.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "symtensor/su2.hpp"

namespace symtensor {

namespace {
std::atomic<long> g_dense_limit{10'000'000};
}

long dense_entry_limit() { return g_dense_limit.load(); }
void set_dense_entry_limit(long limit) { g_dense_limit.store(limit); }

namespace {

/// Charge-weighting diagonal for Abelian invariance checks.
Eigen::MatrixXd charge_operator(const RepSpace& space) {
  const int n = space.total_dim();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (const auto& s : space.sectors()) {
    const int d = space.system()->dim(s.charge);
    for (int t = 0; t < s.degeneracy * d; ++t) op(off + t, off + t) = s.charge;
    off += s.degeneracy * d;
  }
  return op;
}

}  // namespace

double invariance_residual(const DenseTensorD& t, const std::vector<RepSpace>& spaces,
                           const std::vector<Direction>& directions, Charge root,
                           const ChargeSystemPtr& system) {
  ChargeSystemPtr sys = system ? system : spaces.front().system();
  const int k = static_cast<int>(spaces.size());
  const bool covariant = root != sys->trivial();
  if (t.rank() != k + (covariant ? 1 : 0))
    throw std::invalid_argument("invariance_residual: rank does not match the spaces");

  if (sys->name() == "su2") {
    double worst = 0;
    for (int alpha = 0; alpha < 3; ++alpha) {
      DenseTensorD acc(t.dims());
      for (int l = 0; l < k; ++l) {
        const auto g = space_generators(spaces[static_cast<std::size_t>(l)]);
        Eigen::MatrixXd op = alpha == 0 ? g.jx : (alpha == 1 ? g.ijy : g.jz);
        if (directions[static_cast<std::size_t>(l)] != Direction::Out)
          op = (-op.transpose()).eval();
        acc = acc + dense_apply_op(t, op, l);
      }
      if (covariant) {
        const auto g = real_generators(Spin(root));
        Eigen::MatrixXd op = alpha == 0 ? g.jx : (alpha == 1 ? g.ijy : g.jz);
        op = (-op.transpose()).eval();  // the root axis pairs like an In leg
        acc = acc + dense_apply_op(t, op, k);
      }
      worst = std::max(worst, acc.norm());
    }
    return worst;
  }

  // Abelian: one weighting operator.
  DenseTensorD acc(t.dims());
  for (int l = 0; l < k; ++l) {
    Eigen::MatrixXd op = charge_operator(spaces[static_cast<std::size_t>(l)]);
    if (directions[static_cast<std::size_t>(l)] != Direction::Out) op = -op;
    acc = acc + dense_apply_op(t, op, l);
  }
  if (covariant) {
    Eigen::MatrixXd op = -Eigen::MatrixXd::Identity(sys->dim(root), sys->dim(root)) *
                         static_cast<double>(root);
    acc = acc + dense_apply_op(t, op, k);
  }
  return acc.norm();
}

double invariance_residual(const SymTensor& t) {
  std::vector<RepSpace> spaces;
  std::vector<Direction> dirs;
  for (int l = 0; l < t.rank(); ++l) {
    spaces.push_back(t.declared_space(l));
    dirs.push_back(t.direction(l));
  }
  return invariance_residual(to_dense(t), spaces, dirs, t.root(), t.system());
}

SymTensor random_invariant(const std::vector<RepSpace>& declared_spaces,
                           const std::vector<Direction>& directions,
                           const FusionTree& tree, Charge root, std::mt19937_64& rng) {
  SymTensor t(declared_spaces, directions, tree, root);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto paths = t.allowed_paths();
  if (paths.empty())
    throw std::invalid_argument("random_invariant: no allowed paths for this root charge");
  for (const auto& p : paths) {
    DenseTensorD blk(t.block_dims(p));
    for (auto& v : blk.data()) v = gauss(rng);
    t.set_block(p, std::move(blk));
  }
  return t;
}

DenseTensorD random_invariant_operator_dense(const RepSpace& space, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = space.total_dim();
  DenseTensorD out({n, n});
  int off = 0;
  for (const auto& s : space.sectors()) {
    const int d = space.system()->dim(s.charge);
    Eigen::MatrixXd blk(s.degeneracy, s.degeneracy);
    for (int i = 0; i < s.degeneracy; ++i)
      for (int j = 0; j < s.degeneracy; ++j) blk(i, j) = gauss(rng);
    for (int i = 0; i < s.degeneracy; ++i)
      for (int j = 0; j < s.degeneracy; ++j)
        for (int m = 0; m < d; ++m)
          out.at({off + i * d + m, off + j * d + m}) = blk(i, j);
    off += s.degeneracy * d;
  }
  return out;
}

Eigen::MatrixXd fuse_isometry(const RepSpace& a, const RepSpace& b) {
  const auto [prod, fmap] = fuse_spaces(a, b);
  const auto& sys = *a.system();
  const int na = a.total_dim(), nb = b.total_dim();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(prod.total_dim(), na * nb);
  for (const auto& s : prod.sectors()) {
    const int dc = sys.dim(s.charge);
    const int coff = prod.sector_offset(s.charge);
    for (int t = 0; t < s.degeneracy; ++t) {
      const auto& src = fmap.source(s.charge, t);
      const int da = sys.dim(src.ca), db = sys.dim(src.cb);
      const int ao = a.sector_offset(src.ca) + src.ta * da;
      const int bo = b.sector_offset(src.cb) + src.tb * db;
      if (sys.name() == "su2") {
        const CGBlock& cg = cg_block(Spin(src.ca), Spin(src.cb), Spin(s.charge));
        for (int ma = 0; ma < da; ++ma)
          for (int mb = 0; mb < db; ++mb)
            for (int mc = 0; mc < dc; ++mc) {
              const double v = cg.at(ma, mb, mc);
              if (v != 0.0)
                u(coff + t * dc + mc, (ao + ma) * nb + (bo + mb)) = v;
            }
      } else {
        u(coff + t, ao * nb + bo) = 1.0;
      }
    }
  }
  return u;
}

void install_invariance_audit(long max_dense_entries, double* max_residual_out,
                              long* checked_out) {
  if (max_dense_entries <= 0) {
    set_op_audit_hook(nullptr);
    return;
  }
  set_op_audit_hook([max_dense_entries, max_residual_out, checked_out](
                        const SymTensor& t, const char*) {
    long entries = 1;
    for (int l = 0; l < t.rank(); ++l) {
      entries *= t.tree_space(l).total_dim();
      if (entries > max_dense_entries) return;
    }
    if (t.root() != t.system()->trivial()) entries *= t.system()->dim(t.root());
    if (entries > max_dense_entries) return;
    std::vector<RepSpace> spaces;
    std::vector<Direction> dirs;
    for (int l = 0; l < t.rank(); ++l) {
      spaces.push_back(t.declared_space(l));
      dirs.push_back(t.direction(l));
    }
    const DenseTensorD dense = to_dense(t);
    const double r = invariance_residual(dense, spaces, dirs, t.root(), t.system()) /
                     std::max(1.0, dense.norm());
    if (max_residual_out) *max_residual_out = std::max(*max_residual_out, r);
    if (checked_out) ++*checked_out;
  });
}

}  // namespace symtensor
