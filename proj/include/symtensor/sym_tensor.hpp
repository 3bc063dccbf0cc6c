// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "symtensor/dense_tensor.hpp"
#include "symtensor/gamma.hpp"

namespace symtensor {

/// An invariant tensor in tree-decomposed storage: leaf index spaces with
/// directions, a fusion tree, a root charge (trivial for invariant tensors, a
/// fixed charge for covariant tops) and one dense degeneracy block per
/// fusion-consistent sector path. Structural tensors are never stored.
///
/// Leaf spaces are kept in outgoing form ("tree spaces"); the declared space
/// of an In/InR leg is the dual. A reversal is metadata only: it flips the
/// declared direction and leaves the block normalization ("storage"
/// direction) untouched until absorb_bends consumes the pending bends.
class SymTensor {
 public:
  SymTensor() = default;

  /// Build an all-zero tensor from declared spaces and directions.
  SymTensor(std::vector<RepSpace> declared_spaces, std::vector<Direction> directions,
            FusionTree tree, Charge root);

  int rank() const { return static_cast<int>(tree_spaces_.size()); }
  const ChargeSystemPtr& system() const { return sys_; }
  const FusionTree& tree() const { return tree_; }
  Charge root() const { return root_; }

  const RepSpace& tree_space(int leg) const { return tree_spaces_[static_cast<std::size_t>(leg)]; }
  const std::vector<RepSpace>& tree_spaces() const { return tree_spaces_; }
  RepSpace declared_space(int leg) const;
  Direction direction(int leg) const { return declared_[static_cast<std::size_t>(leg)]; }
  Direction storage_direction(int leg) const { return storage_[static_cast<std::size_t>(leg)]; }
  const std::vector<Direction>& directions() const { return declared_; }
  bool has_pending_bends() const { return declared_ != storage_; }

  const std::map<SectorPath, DenseTensorD>& blocks() const { return blocks_; }
  const DenseTensorD* block(const SectorPath& p) const;
  /// Shape check against the path degeneracies is enforced.
  void set_block(const SectorPath& p, DenseTensorD data);
  std::vector<int> block_dims(const SectorPath& p) const;
  /// All fusion-consistent paths for this tensor.
  std::vector<SectorPath> allowed_paths() const;

  long stored_coefficients() const;
  /// Drop blocks whose largest entry is at most eps.
  void prune(double eps = 0.0);

  friend class SymTensorOps;

 private:
  ChargeSystemPtr sys_;
  std::vector<RepSpace> tree_spaces_;
  std::vector<Direction> declared_, storage_;
  FusionTree tree_;
  Charge root_ = 0;
  std::map<SectorPath, DenseTensorD> blocks_;
};

/// Result of from_dense: the tensor plus the projection residual.
struct FromDenseResult {
  SymTensor tensor;
  double residual;
};

/// Project a dense tensor onto tree-decomposed form. Throws when the relative
/// residual exceeds tol (non-invariant input) or on a dimension mismatch. For
/// a nontrivial root charge the dense carries one extra trailing axis of size
/// dim(root).
FromDenseResult from_dense(const DenseTensorD& dense,
                           const std::vector<RepSpace>& declared_spaces,
                           const std::vector<Direction>& directions,
                           const FusionTree& tree, Charge root, double tol = 1e-10);

/// Exact dense realization (subject to the dense oracle size guard).
DenseTensorD to_dense(const SymTensor& t);

/// Recouple to another fusion tree over the same leaves; the dense
/// realization is unchanged.
SymTensor new_tree(const SymTensor& t, const FusionTree& tau_prime);

/// Metadata-only direction change; the dense realization changes by the
/// attached cup/cap matrices. Reversing twice restores the tensor exactly.
SymTensor reverse(const SymTensor& t, const std::vector<Direction>& new_directions);

/// Consume pending bends into the blocks (one scalar per path and leg); the
/// dense realization is unchanged.
SymTensor absorb_bends(const SymTensor& t);

/// Permute legs (output leg l carries input leg perm[l]) and recouple to
/// tau_prime; pending bends travel with their legs.
SymTensor permute(const SymTensor& t, const std::vector<int>& perm,
                  const FusionTree& tau_prime);

/// A run of adjacent legs to be fused (count == 1 leaves the leg untouched).
struct LegGroup {
  int first;
  int count;
};

/// Everything needed to undo a fuse of one group.
struct FuseRecord {
  FusionTree group_tree;                    // left comb over the group
  std::vector<RepSpace> group_tree_spaces;  // outgoing-form spaces
  Direction direction;                      // common declared direction
  std::shared_ptr<const TreeLayout> layout;
};

struct FuseResult {
  SymTensor tensor;
  std::vector<FuseRecord> records;  // one per group with count >= 2
};

/// Fuse each group of adjacent legs into one leg (X^fuse re-indexing; the
/// recoupling to bring group legs onto common nodes is the only arithmetic).
/// Groups must cover all legs in order and be direction-uniform.
FuseResult fuse(const SymTensor& t, const std::vector<LegGroup>& groups,
                const FusionTree& tau_out);

/// Split leg `leg` back into the group recorded at fuse time; pure
/// re-indexing.
SymTensor split(const SymTensor& t, int leg, const FuseRecord& record);

/// Contract pairs of (A leg, B leg); each pair must have equal declared
/// spaces and opposite directions. Output legs are A's free legs followed by
/// B's free legs, with their original directions, on a left comb. A full
/// contraction yields a rank-1 tensor over the trivial space.
SymTensor contract(const SymTensor& a, const SymTensor& b,
                   const std::vector<std::pair<int, int>>& pairs);

/// Extract the value of a rank-1 tensor over a trivial one-dimensional space.
double scalar_value(const SymTensor& t);

/// Blockwise sum; requires identical spaces, directions, tree and root.
SymTensor add(const SymTensor& a, const SymTensor& b);
SymTensor scale(const SymTensor& a, double s);
/// Frobenius norm of the dense realization, computed blockwise.
double norm(const SymTensor& a);

/// The same dense entries with every direction flipped (the bra-side copy of
/// a real tensor). Root must be trivial.
SymTensor conjugated(const SymTensor& t);

/// Optional audit hook: when set, every operation that returns a SymTensor
/// reports its output here (used for whole-suite invariance sweeps).
using OpAuditHook = std::function<void(const SymTensor&, const char* op)>;
void set_op_audit_hook(OpAuditHook hook);

}  // namespace symtensor
