// SPDX-License-Identifier: Apache-2.0
#include "symtensor/block_linalg.hpp"

#include <algorithm>
#include <stdexcept>

#include "symtensor/counters.hpp"
#include "symtensor/parallel.hpp"

namespace symtensor {

BlockDiagMatrix::BlockDiagMatrix(RepSpace row_space, RepSpace col_space)
    : row_(std::move(row_space)), col_(std::move(col_space)) {
  if (row_.system()->name() != col_.system()->name())
    throw std::invalid_argument("BlockDiagMatrix: mixed charge systems");
}

const Eigen::MatrixXd* BlockDiagMatrix::block(Charge c) const {
  auto it = blocks_.find(c);
  return it == blocks_.end() ? nullptr : &it->second;
}

void BlockDiagMatrix::set_block(Charge c, Eigen::MatrixXd m) {
  const int dr = row_.degeneracy(c), dc = col_.degeneracy(c);
  if (dr == 0 || dc == 0)
    throw std::invalid_argument("BlockDiagMatrix: charge absent from row or column space");
  if (m.rows() != dr || m.cols() != dc)
    throw std::invalid_argument("BlockDiagMatrix: block shape mismatch");
  blocks_[c] = std::move(m);
}

Eigen::MatrixXd BlockDiagMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(row_.total_dim(), col_.total_dim());
  const auto& sys = *row_.system();
  for (const auto& [c, b] : blocks_) {
    const int d = sys.dim(c);
    const int ro = row_.sector_offset(c), co = col_.sector_offset(c);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j)
        out.block(ro + i * d, co + j * d, d, d) =
            b(i, j) * Eigen::MatrixXd::Identity(d, d);
  }
  return out;
}

BlockDiagMatrix BlockDiagMatrix::identity(const RepSpace& space) {
  BlockDiagMatrix m(space, space);
  for (const auto& s : space.sectors())
    m.set_block(s.charge, Eigen::MatrixXd::Identity(s.degeneracy, s.degeneracy));
  return m;
}

BlockDiagMatrix matmul(const BlockDiagMatrix& m, const BlockDiagMatrix& n) {
  if (!(m.col_space() == n.row_space()))
    throw std::invalid_argument("matmul: inner spaces differ");
  BlockDiagMatrix out(m.row_space(), n.col_space());
  std::vector<std::pair<Charge, const Eigen::MatrixXd*>> work;
  for (const auto& [c, mb] : m.blocks())
    if (n.block(c)) work.push_back({c, &mb});
  std::vector<Eigen::MatrixXd> results(work.size());
  parallel_for(static_cast<long>(work.size()), [&](long i) {
    const auto& [c, mb] = work[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd* nb = n.block(c);
    counters::add_matmul_flops(static_cast<std::int64_t>(mb->rows()) * mb->cols() *
                               nb->cols());
    results[static_cast<std::size_t>(i)] = (*mb) * (*nb);
  });
  for (std::size_t i = 0; i < work.size(); ++i)
    out.set_block(work[i].first, std::move(results[i]));
  return out;
}

BlockSvd svd(const BlockDiagMatrix& t) {
  BlockSvd out;
  out.u = BlockDiagMatrix(t.row_space(), t.row_space());
  out.v = BlockDiagMatrix(t.col_space(), t.col_space());
  // U_c is d_r x r and V_c is r x d_c with r = min(d_r, d_c); they live in
  // rectangular "kept" spaces assembled below.
  std::vector<RepSpace::Sector> mid_sectors;
  for (const auto& [c, b] : t.blocks())
    mid_sectors.push_back({c, static_cast<int>(std::min(b.rows(), b.cols()))});
  RepSpace mid(t.row_space().system(), mid_sectors);
  out.u = BlockDiagMatrix(t.row_space(), mid);
  out.v = BlockDiagMatrix(mid, t.col_space());
  for (const auto& [c, b] : t.blocks()) {
    counters::add_svd_flops(static_cast<std::int64_t>(b.rows()) * b.cols() *
                            std::min(b.rows(), b.cols()));
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u.set_block(c, dec.matrixU());
    out.values[c] = dec.singularValues();
    out.v.set_block(c, dec.matrixV().transpose());
  }
  return out;
}

TruncatedSvd truncate(const BlockSvd& d, int chi_target) {
  if (chi_target <= 0) throw std::invalid_argument("truncate: chi_target must be positive");
  const auto& sys = *d.u.row_space().system();
  struct Item {
    double value;
    Charge c;
    int idx;
  };
  std::vector<Item> items;
  for (const auto& [c, vals] : d.values)
    for (int i = 0; i < vals.size(); ++i) items.push_back({vals[i], c, i});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.c != b.c) return a.c > b.c;  // prefer larger charge
    return a.idx < b.idx;              // then lower row index
  });
  std::map<Charge, int> kept_count;
  int used = 0;
  for (const auto& it : items) {
    const int cost = sys.dim(it.c);
    if (used + cost <= chi_target) {
      ++kept_count[it.c];
      used += cost;
    }
  }
  std::vector<RepSpace::Sector> kept_sectors;
  for (const auto& [c, n] : kept_count) kept_sectors.push_back({c, n});
  RepSpace kept(d.u.row_space().system(), kept_sectors);

  TruncatedSvd out;
  out.kept = kept;
  out.u = BlockDiagMatrix(d.u.row_space(), kept);
  out.v = BlockDiagMatrix(kept, d.v.col_space());
  for (const auto& [c, n] : kept_count) {
    // within one charge the kept values form a prefix of the descending list
    out.u.set_block(c, d.u.block(c)->leftCols(n));
    out.v.set_block(c, d.v.block(c)->topRows(n));
    out.values[c] = d.values.at(c).head(n);
  }
  return out;
}

BlockEig eig(const BlockDiagMatrix& t, bool hermitian) {
  if (!hermitian)
    throw std::invalid_argument("eig: non-hermitian spectral decomposition is unsupported");
  if (!(t.row_space() == t.col_space()))
    throw std::invalid_argument("eig: square operator required");
  BlockEig out;
  out.vectors = BlockDiagMatrix(t.row_space(), t.col_space());
  for (const auto& [c, b] : t.blocks()) {
    if (b.rows() != b.cols()) throw std::invalid_argument("eig: non-square block");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dec(b);
    out.values[c] = dec.eigenvalues();
    out.vectors.set_block(c, dec.eigenvectors());
  }
  return out;
}

BlockDiagMatrix tree_to_blockdiag(const SymTensor& t_in) {
  const SymTensor t = absorb_bends(t_in);
  if (t.rank() != 2) throw std::invalid_argument("tree_to_blockdiag: rank-2 required");
  const bool in_first = t.direction(0) == Direction::In && t.direction(1) == Direction::Out;
  const bool out_first = t.direction(0) == Direction::Out && t.direction(1) == Direction::In;
  if (!in_first && !out_first)
    throw std::invalid_argument("tree_to_blockdiag: one In and one Out leg required");
  const int in_leg = in_first ? 0 : 1;
  const int out_leg = in_first ? 1 : 0;
  BlockDiagMatrix m(t.tree_space(out_leg), t.declared_space(in_leg));
  const auto& sys = *t.system();
  for (const auto& [p, blk] : t.blocks()) {
    const Charge c = p.leaves[static_cast<std::size_t>(out_leg)];
    Eigen::MatrixXd b(blk.dims()[static_cast<std::size_t>(out_leg)],
                      blk.dims()[static_cast<std::size_t>(in_leg)]);
    for (int r = 0; r < b.rows(); ++r)
      for (int cc = 0; cc < b.cols(); ++cc)
        b(r, cc) = in_first ? blk.at({cc, r}) : blk.at({r, cc});
    (void)sys;
    m.set_block(c, std::move(b));
  }
  return m;
}

SymTensor blockdiag_to_tree(const BlockDiagMatrix& m) {
  SymTensor t({m.col_space(), m.row_space()}, {Direction::In, Direction::Out},
              left_comb(2), m.row_space().system()->trivial());
  const auto& sys = *m.row_space().system();
  for (const auto& [c, b] : m.blocks()) {
    SectorPath p;
    p.leaves = {sys.dual(c), c};
    p.internals = {sys.trivial()};
    DenseTensorD blk({static_cast<int>(b.cols()), static_cast<int>(b.rows())});
    for (int r = 0; r < b.rows(); ++r)
      for (int cc = 0; cc < b.cols(); ++cc) blk.at({cc, r}) = b(r, cc);
    t.set_block(p, std::move(blk));
  }
  return t;
}

}  // namespace symtensor
