// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "symtensor/rep_space.hpp"

namespace symtensor {

/// An ordered sequence of pairwise fusions over k leaves. Operand ids
/// 0..k-1 denote leaves, k+i denotes the output of node i. Every node fuses
/// two adjacent subtrees in the linear leaf order; the last remaining line is
/// the root. k = 1 has an empty node list.
class FusionTree {
 public:
  struct Node {
    int left;
    int right;
    friend bool operator==(const Node&, const Node&) = default;
  };

  FusionTree() : leaf_count_(1) {}
  FusionTree(int leaf_count, std::vector<Node> nodes);

  int leaf_count() const { return leaf_count_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Leaf interval [first, last) covered by operand id.
  std::pair<int, int> span(int id) const;

  /// Id of the root line (leaf 0 for k = 1, else output of the last node in
  /// topological completion).
  int root_id() const;

  /// Nodes reordered so operands always precede their node (stable).
  std::vector<int> topological_order() const;

  friend bool operator==(const FusionTree& a, const FusionTree& b) {
    return a.leaf_count_ == b.leaf_count_ && a.nodes_ == b.nodes_;
  }

 private:
  int leaf_count_;
  std::vector<Node> nodes_;
};

/// The canonical storage tree ((...((1,2),3)...),k).
FusionTree left_comb(int k);

/// A fusion-rule-consistent charge assignment to every leaf and every
/// internal line of a tree. internals[i] is the output charge of node i;
/// for k = 1 the root charge equals leaves[0].
struct SectorPath {
  std::vector<Charge> leaves;
  std::vector<Charge> internals;

  Charge root(const FusionTree& tree) const {
    if (tree.leaf_count() == 1) return leaves.at(0);
    return internals.at(static_cast<std::size_t>(
        tree.root_id() - tree.leaf_count()));
  }
  friend bool operator==(const SectorPath&, const SectorPath&) = default;
  friend std::strong_ordering operator<=>(const SectorPath&, const SectorPath&) = default;
};

/// All fusion-rule-consistent paths over the tree with the given root charge,
/// in deterministic lexicographic order (leaf sector indices, then internal
/// charges in node order).
std::vector<SectorPath> enumerate_paths(const FusionTree& tree,
                                        const std::vector<RepSpace>& leaf_spaces,
                                        Charge root_charge);

/// Product of the leaf degeneracies along the path.
long path_degeneracy(const SectorPath& path, const std::vector<RepSpace>& leaf_spaces);

/// Degeneracy-basis layout of the coupled space built by fusing leaf spaces
/// along a tree: for each root sector the ordered list of (path, leaf
/// degeneracy labels), consistent with iterated fuse_spaces / X^fuse ordering.
class TreeLayout {
 public:
  struct Entry {
    int path_index;          // into paths()
    std::vector<int> ts;     // 0-based leaf degeneracy labels
  };

  TreeLayout(FusionTree tree, std::vector<RepSpace> leaf_spaces);

  const FusionTree& tree() const { return tree_; }
  const std::vector<RepSpace>& leaf_spaces() const { return leaf_spaces_; }
  /// Coupled space of the root line.
  const RepSpace& coupled_space() const { return coupled_; }
  /// All paths with the given root charge (enumerate_paths order).
  const std::vector<SectorPath>& paths(Charge root) const;
  /// Basis entries of the root sector `root`, in X^fuse nesting order.
  const std::vector<Entry>& basis(Charge root) const;
  /// Position of (path, ts) within its root sector.
  int position(Charge root, const SectorPath& path, const std::vector<int>& ts) const;

 private:
  FusionTree tree_;
  std::vector<RepSpace> leaf_spaces_;
  RepSpace coupled_;
  std::vector<Charge> root_charges_;
  std::vector<std::vector<SectorPath>> paths_;
  std::vector<std::vector<Entry>> basis_;
  int root_slot(Charge root) const;
};

}  // namespace symtensor
