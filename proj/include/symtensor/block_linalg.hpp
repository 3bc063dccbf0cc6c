// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "symtensor/sym_tensor.hpp"

namespace symtensor {

/// An invariant matrix as a family of per-charge degeneracy blocks; the dense
/// realization is the direct sum of (block x identity on the charge's
/// projection space). The unit of all dense linear algebra here.
class BlockDiagMatrix {
 public:
  BlockDiagMatrix() = default;
  BlockDiagMatrix(RepSpace row_space, RepSpace col_space);

  const RepSpace& row_space() const { return row_; }
  const RepSpace& col_space() const { return col_; }
  const std::map<Charge, Eigen::MatrixXd>& blocks() const { return blocks_; }
  const Eigen::MatrixXd* block(Charge c) const;
  void set_block(Charge c, Eigen::MatrixXd m);

  /// Dense realization (basis layout per RepSpace::sector_offset).
  Eigen::MatrixXd dense() const;
  static BlockDiagMatrix identity(const RepSpace& space);

 private:
  RepSpace row_, col_;
  std::map<Charge, Eigen::MatrixXd> blocks_;
};

/// Blockwise product; increments the flop counter by sum_c r*k*c.
BlockDiagMatrix matmul(const BlockDiagMatrix& m, const BlockDiagMatrix& n);

struct BlockSvd {
  BlockDiagMatrix u;
  /// Singular values per charge, descending within each charge.
  std::map<Charge, Eigen::VectorXd> values;
  BlockDiagMatrix v;  // right factor, T_c = U_c * diag(S_c) * V_c
};
/// Per-charge singular value decomposition T_c = U_c S_c V_c.
BlockSvd svd(const BlockDiagMatrix& t);

struct TruncatedSvd {
  BlockDiagMatrix u;
  std::map<Charge, Eigen::VectorXd> values;
  BlockDiagMatrix v;
  RepSpace kept;
};
/// Multiplet-respecting global-greedy truncation: singular values are ranked
/// globally; keeping one value of charge c consumes dim(c) units of the
/// budget; values that no longer fit are skipped. Ties prefer the larger
/// charge, then the lower row index within the block.
TruncatedSvd truncate(const BlockSvd& decomposition, int chi_target);

struct BlockEig {
  std::map<Charge, Eigen::VectorXd> values;  // ascending per charge
  BlockDiagMatrix vectors;
};
/// Per-charge spectral decomposition; hermitian only (general eig is out of
/// scope by design).
BlockEig eig(const BlockDiagMatrix& t, bool hermitian = true);

/// Rank-2 tree decomposition (one In, one Out leg) to its block-diagonal
/// matrix: rows over the Out leg, columns over the In leg.
BlockDiagMatrix tree_to_blockdiag(const SymTensor& t);

/// Back to a rank-2 tree decomposition with directions (In, Out) on a
/// two-leaf tree; exact inverse of tree_to_blockdiag.
SymTensor blockdiag_to_tree(const BlockDiagMatrix& m);

}  // namespace symtensor
