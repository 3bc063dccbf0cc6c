// SPDX-License-Identifier: Apache-2.0
#include "symtensor/models/heisenberg.hpp"

#include <stdexcept>

#include "symtensor/dense_oracle.hpp"
#include "symtensor/su2.hpp"

namespace symtensor::models {

RepSpace spin_half_site() { return make_space(su2_system(), {{1, 1}}); }

RepSpace blocked_site() { return make_space(su2_system(), {{0, 1}, {2, 1}}); }

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// 4 * (JxJx + JyJy + JzJz) on two spin-1/2 factors; JyJy = -(iJy)(x)(iJy)
/// keeps the matrix real.
Eigen::MatrixXd coupling_4x4() {
  const auto g = real_generators(Spin(1));
  return 4.0 * (kron(g.jx, g.jx) - kron(g.ijy, g.ijy) + kron(g.jz, g.jz));
}

}  // namespace

Eigen::MatrixXd heisenberg_dense_two_site(const RepSpace& site) {
  if (site.system()->name() != "su2")
    throw std::invalid_argument("heisenberg_gate: SU(2) site space required");
  if (site == spin_half_site()) return coupling_4x4();
  if (site == blocked_site()) {
    // Spins (1,2) in the left site, (3,4) in the right one: the cross bond
    // (2,3) plus half of each internal bond, so summing gates over a ring
    // reproduces the spin chain exactly.
    const Eigen::MatrixXd h = coupling_4x4();
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd i4 = Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd full = kron(i2, kron(h, i2));
    full += 0.5 * kron(h, i4);
    full += 0.5 * kron(i4, h);
    const RepSpace half = spin_half_site();
    const Eigen::MatrixXd u2 = fuse_isometry(half, half);
    const Eigen::MatrixXd uu = kron(u2, u2);
    return uu * full * uu.transpose();
  }
  throw std::invalid_argument("heisenberg_gate: unsupported site space");
}

SymTensor heisenberg_gate(const RepSpace& site) {
  const Eigen::MatrixXd m = heisenberg_dense_two_site(site);
  const int n = site.total_dim();
  DenseTensorD d({n, n, n, n});
  // legs (out1, out2, in1, in2): T[o1,o2,i1,i2] = <o1 o2|h|i1 i2>
  for (int o1 = 0; o1 < n; ++o1)
    for (int o2 = 0; o2 < n; ++o2)
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
          d.at({o1, o2, i1, i2}) = m(o1 * n + o2, i1 * n + i2);
  auto r = from_dense(d, {site, site, site, site},
                      {Direction::Out, Direction::Out, Direction::In, Direction::In},
                      left_comb(4), 0, 1e-12);
  return std::move(r.tensor);
}

BlockDiagMatrix heisenberg_coupled_blocks(const RepSpace& site) {
  const Eigen::MatrixXd m = heisenberg_dense_two_site(site);
  const Eigen::MatrixXd u = fuse_isometry(site, site);
  const Eigen::MatrixXd coupled = u * m * u.transpose();
  auto [prod, fmap] = fuse_spaces(site, site);
  BlockDiagMatrix out(prod, prod);
  const auto& sys = *site.system();
  for (const auto& s : prod.sectors()) {
    const int d = sys.dim(s.charge);
    const int off = prod.sector_offset(s.charge);
    Eigen::MatrixXd blk(s.degeneracy, s.degeneracy);
    for (int i = 0; i < s.degeneracy; ++i)
      for (int j = 0; j < s.degeneracy; ++j) blk(i, j) = coupled(off + i * d, off + j * d);
    out.set_block(s.charge, blk);
  }
  return out;
}

}  // namespace symtensor::models
