// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symtensor/fusion_tree.hpp"

namespace symtensor {

/// The sparse, charge-block-diagonal linear map relating two tree
/// decompositions (optionally with a leaf permutation). Coefficients are
/// computed algebraically from F moves and swap factors, never by
/// materializing projection indices. Immutable after build.
class GammaMap {
 public:
  struct Term {
    int out_path;
    double coeff;
  };

  const FusionTree& tree_in() const { return tree_in_; }
  const FusionTree& tree_out() const { return tree_out_; }
  /// Output leg l carries input leg perm[l].
  const std::vector<int>& perm() const { return perm_; }
  Charge root() const { return root_; }

  const std::vector<SectorPath>& in_paths() const { return in_paths_; }
  const std::vector<SectorPath>& out_paths() const { return out_paths_; }
  /// Sparse columns: table()[i] lists the output contributions of in_paths()[i].
  const std::vector<std::vector<Term>>& table() const { return table_; }

  int in_path_index(const SectorPath& p) const;
  int out_path_index(const SectorPath& p) const;
  double coefficient(const SectorPath& in, const SectorPath& out) const;

  long stored_coefficients() const;

  /// The inverse map (recoupling maps are real orthogonal).
  GammaMap transposed() const;
  /// this after other: apply other first, then this.
  GammaMap composed_after(const GammaMap& other) const;

  /// Assembly from raw parts (builder and deserializer use this).
  static GammaMap from_parts(FusionTree tree_in, FusionTree tree_out,
                             std::vector<int> perm, Charge root,
                             std::vector<SectorPath> in_paths,
                             std::vector<SectorPath> out_paths,
                             std::vector<std::vector<Term>> table);

 private:
  FusionTree tree_in_, tree_out_;
  std::vector<int> perm_;
  Charge root_ = 0;
  std::vector<SectorPath> in_paths_, out_paths_;
  std::vector<std::vector<Term>> table_;
  std::map<SectorPath, int> in_index_, out_index_;
  void rebuild_indices();
};

/// Pure recoupling between two trees over the same leaves: both trees are
/// normalized to the left comb by elementary F moves and composed.
GammaMap gamma_recouple(const FusionTree& tau, const FusionTree& tau_prime,
                        const std::vector<RepSpace>& leaf_spaces, Charge root);

/// Recoupling combined with a leaf permutation; the permutation is decomposed
/// into adjacent swaps at the comb, each mediated by a swap factor between two
/// F moves. Output leg l carries input leg perm[l].
GammaMap gamma_permute(const FusionTree& tau, const std::vector<int>& perm,
                       const FusionTree& tau_prime,
                       const std::vector<RepSpace>& leaf_spaces, Charge root);

/// Scalar value of the two-tree spin network with fixed charge assignments:
/// the (in,out) coefficient of the corresponding Gamma map.
double evaluate_spin_network(const FusionTree& tau, const SectorPath& in,
                             const std::vector<int>& perm, const FusionTree& tau_prime,
                             const SectorPath& out,
                             const std::vector<RepSpace>& leaf_spaces);

/// Per-path scalar absorbed into a degeneracy block when a pending index
/// bend is consumed; `from` and `to` are the storage and declared directions.
enum class Direction { Out, In, InR };
double reversal_factor(const ChargeSystem& sys, Charge tree_charge, Direction from,
                       Direction to);

/// Precompute cache for Gamma maps: first call builds and stores, later calls
/// return the stored map and evaluate zero spin networks. Optionally persists
/// to a directory of versioned JSON files. Concurrent readers are safe;
/// builders are serialized per cache.
class GammaCache {
 public:
  GammaCache() = default;
  explicit GammaCache(std::string disk_dir) : disk_dir_(std::move(disk_dir)) {}

  std::shared_ptr<const GammaMap> get_or_build(const FusionTree& tau,
                                               const std::vector<int>& perm,
                                               const FusionTree& tau_prime,
                                               const std::vector<RepSpace>& leaf_spaces,
                                               Charge root);

  const std::string& disk_dir() const { return disk_dir_; }
  void set_disk_dir(std::string dir) { disk_dir_ = std::move(dir); }

  /// Process-wide cache used by the tensor operations.
  static GammaCache& global();

 private:
  std::string disk_dir_;
  struct Impl;
  std::shared_ptr<Impl> impl_ = make_impl();
  static std::shared_ptr<Impl> make_impl();
};

/// Cache key serialization (also the disk format identity).
std::string gamma_cache_key(const FusionTree& tau, const std::vector<int>& perm,
                            const FusionTree& tau_prime,
                            const std::vector<RepSpace>& leaf_spaces, Charge root);

}  // namespace symtensor
