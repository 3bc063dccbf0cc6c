// SPDX-License-Identifier: Apache-2.0
#include "symtensor/fusion_tree.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace symtensor {

FusionTree::FusionTree(int leaf_count, std::vector<Node> nodes)
    : leaf_count_(leaf_count), nodes_(std::move(nodes)) {
  if (leaf_count_ < 1) throw std::invalid_argument("FusionTree: need at least one leaf");
  if (static_cast<int>(nodes_.size()) != leaf_count_ - 1)
    throw std::invalid_argument("FusionTree: a tree over k leaves has k-1 nodes");
  // Spans double as the validity check: every operand must be defined exactly
  // once, spans of the two operands of a node must be adjacent, and the root
  // must cover all leaves.
  (void)span(root_id());
  std::vector<int> used(static_cast<std::size_t>(leaf_count_ + node_count()), 0);
  for (const auto& n : nodes_) {
    for (int op : {n.left, n.right}) {
      if (op < 0 || op >= leaf_count_ + node_count())
        throw std::invalid_argument("FusionTree: operand id out of range");
      if (++used[static_cast<std::size_t>(op)] > 1)
        throw std::invalid_argument("FusionTree: operand consumed twice");
    }
  }
  for (int l = 0; l < leaf_count_; ++l)
    if (leaf_count_ > 1 && used[static_cast<std::size_t>(l)] != 1)
      throw std::invalid_argument("FusionTree: every leaf must be consumed exactly once");
}

std::pair<int, int> FusionTree::span(int id) const {
  if (id < leaf_count_) return {id, id + 1};
  const int i = id - leaf_count_;
  if (i >= node_count()) throw std::invalid_argument("FusionTree::span: bad id");
  const auto& n = nodes_[static_cast<std::size_t>(i)];
  const auto [la, lb] = span(n.left);
  const auto [ra, rb] = span(n.right);
  if (lb != ra)
    throw std::invalid_argument("FusionTree: node fuses non-adjacent subtrees");
  return {la, rb};
}

int FusionTree::root_id() const {
  if (leaf_count_ == 1) return 0;
  // The root is the unique id that is not consumed by any node.
  std::vector<bool> consumed(static_cast<std::size_t>(leaf_count_ + node_count()), false);
  for (const auto& n : nodes_) {
    consumed[static_cast<std::size_t>(n.left)] = true;
    consumed[static_cast<std::size_t>(n.right)] = true;
  }
  for (int i = node_count() - 1; i >= 0; --i)
    if (!consumed[static_cast<std::size_t>(leaf_count_ + i)]) return leaf_count_ + i;
  throw std::invalid_argument("FusionTree: no root line found");
}

std::vector<int> FusionTree::topological_order() const {
  std::vector<int> order;
  std::vector<bool> done(nodes_.size(), false);
  while (order.size() < nodes_.size()) {
    bool progressed = false;
    for (int i = 0; i < node_count(); ++i) {
      if (done[static_cast<std::size_t>(i)]) continue;
      const auto& n = nodes_[static_cast<std::size_t>(i)];
      auto ready = [&](int op) {
        return op < leaf_count_ || done[static_cast<std::size_t>(op - leaf_count_)];
      };
      if (ready(n.left) && ready(n.right)) {
        order.push_back(i);
        done[static_cast<std::size_t>(i)] = true;
        progressed = true;
      }
    }
    if (!progressed) throw std::invalid_argument("FusionTree: cyclic node list");
  }
  return order;
}

FusionTree left_comb(int k) {
  std::vector<FusionTree::Node> nodes;
  if (k >= 2) {
    nodes.push_back({0, 1});
    for (int l = 2; l < k; ++l) nodes.push_back({k + l - 2, l});
  }
  return FusionTree(k, std::move(nodes));
}

std::vector<SectorPath> enumerate_paths(const FusionTree& tree,
                                        const std::vector<RepSpace>& leaf_spaces,
                                        Charge root_charge) {
  const int k = tree.leaf_count();
  if (static_cast<int>(leaf_spaces.size()) != k)
    throw std::invalid_argument("enumerate_paths: one leaf space per leaf required");
  const auto& sys = *leaf_spaces.front().system();
  for (const auto& sp : leaf_spaces)
    if (sp.system()->name() != sys.name())
      throw std::invalid_argument("enumerate_paths: mixed charge systems");

  const auto topo = tree.topological_order();
  std::vector<SectorPath> out;
  SectorPath cur;
  cur.leaves.resize(static_cast<std::size_t>(k));
  cur.internals.resize(static_cast<std::size_t>(tree.node_count()));

  // Assign internal charges recursively along the topological order.
  auto assign_nodes = [&](auto&& self, std::size_t step) -> void {
    if (step == topo.size()) {
      if (cur.root(tree) == root_charge) out.push_back(cur);
      return;
    }
    const int ni = topo[step];
    const auto& n = tree.nodes()[static_cast<std::size_t>(ni)];
    auto line_charge = [&](int id) {
      return id < k ? cur.leaves[static_cast<std::size_t>(id)]
                    : cur.internals[static_cast<std::size_t>(id - k)];
    };
    for (Charge c : sys.fuse(line_charge(n.left), line_charge(n.right))) {
      cur.internals[static_cast<std::size_t>(ni)] = c;
      self(self, step + 1);
    }
  };

  auto assign_leaves = [&](auto&& self, int leaf) -> void {
    if (leaf == k) {
      if (k == 1) {
        if (cur.root(tree) == root_charge) out.push_back(cur);
      } else {
        assign_nodes(assign_nodes, 0);
      }
      return;
    }
    for (const auto& s : leaf_spaces[static_cast<std::size_t>(leaf)].sectors()) {
      cur.leaves[static_cast<std::size_t>(leaf)] = s.charge;
      self(self, leaf + 1);
    }
  };
  assign_leaves(assign_leaves, 0);

  std::sort(out.begin(), out.end());
  return out;
}

long path_degeneracy(const SectorPath& path, const std::vector<RepSpace>& leaf_spaces) {
  long d = 1;
  for (std::size_t l = 0; l < leaf_spaces.size(); ++l) {
    const int dl = leaf_spaces[l].degeneracy(path.leaves[l]);
    if (dl == 0) return 0;
    d *= dl;
  }
  return d;
}

namespace {

struct LineEntry {
  std::vector<Charge> leaf_charges;      // over the subtree's leaf span
  std::vector<std::pair<int, Charge>> internal_charges;  // (node index, charge)
  std::vector<int> ts;                   // leaf degeneracy labels over the span
};

struct LineBasis {
  RepSpace space;
  // per sector of `space`, ordered by X^fuse nesting
  std::vector<std::vector<LineEntry>> entries;
};

}  // namespace

TreeLayout::TreeLayout(FusionTree tree, std::vector<RepSpace> leaf_spaces)
    : tree_(std::move(tree)), leaf_spaces_(std::move(leaf_spaces)) {
  const int k = tree_.leaf_count();
  if (static_cast<int>(leaf_spaces_.size()) != k)
    throw std::invalid_argument("TreeLayout: one leaf space per leaf required");

  std::vector<LineBasis> lines(static_cast<std::size_t>(k + tree_.node_count()));
  for (int l = 0; l < k; ++l) {
    LineBasis lb;
    lb.space = leaf_spaces_[static_cast<std::size_t>(l)];
    for (const auto& s : lb.space.sectors()) {
      std::vector<LineEntry> list;
      for (int t = 0; t < s.degeneracy; ++t) list.push_back({{s.charge}, {}, {t}});
      lb.entries.push_back(std::move(list));
    }
    lines[static_cast<std::size_t>(l)] = std::move(lb);
  }
  for (int ni : tree_.topological_order()) {
    const auto& n = tree_.nodes()[static_cast<std::size_t>(ni)];
    const auto& L = lines[static_cast<std::size_t>(n.left)];
    const auto& R = lines[static_cast<std::size_t>(n.right)];
    auto [prod, fmap] = fuse_spaces(L.space, R.space);
    LineBasis lb;
    lb.space = prod;
    for (const auto& s : prod.sectors()) {
      std::vector<LineEntry> list;
      for (int t = 0; t < s.degeneracy; ++t) {
        const auto& src = fmap.source(s.charge, t);
        const auto& el = L.entries[static_cast<std::size_t>(L.space.sector_index(src.ca))]
                                  [static_cast<std::size_t>(src.ta)];
        const auto& er = R.entries[static_cast<std::size_t>(R.space.sector_index(src.cb))]
                                  [static_cast<std::size_t>(src.tb)];
        LineEntry e;
        e.leaf_charges = el.leaf_charges;
        e.leaf_charges.insert(e.leaf_charges.end(), er.leaf_charges.begin(),
                              er.leaf_charges.end());
        e.internal_charges = el.internal_charges;
        e.internal_charges.insert(e.internal_charges.end(), er.internal_charges.begin(),
                                  er.internal_charges.end());
        e.internal_charges.emplace_back(ni, s.charge);
        e.ts = el.ts;
        e.ts.insert(e.ts.end(), er.ts.begin(), er.ts.end());
        list.push_back(std::move(e));
      }
      lb.entries.push_back(std::move(list));
    }
    lines[static_cast<std::size_t>(k + ni)] = std::move(lb);
  }

  const auto& rootline = lines[static_cast<std::size_t>(tree_.root_id())];
  coupled_ = rootline.space;
  for (std::size_t si = 0; si < coupled_.sectors().size(); ++si) {
    const Charge root = coupled_.sectors()[si].charge;
    root_charges_.push_back(root);
    auto plist = enumerate_paths(tree_, leaf_spaces_, root);
    std::map<SectorPath, int> pindex;
    for (int i = 0; i < static_cast<int>(plist.size()); ++i) pindex[plist[i]] = i;
    std::vector<Entry> basis;
    for (const auto& e : rootline.entries[si]) {
      SectorPath p;
      p.leaves = e.leaf_charges;
      p.internals.resize(static_cast<std::size_t>(tree_.node_count()));
      for (const auto& [ni, c] : e.internal_charges)
        p.internals[static_cast<std::size_t>(ni)] = c;
      basis.push_back({pindex.at(p), e.ts});
    }
    paths_.push_back(std::move(plist));
    basis_.push_back(std::move(basis));
  }
}

int TreeLayout::root_slot(Charge root) const {
  for (std::size_t i = 0; i < root_charges_.size(); ++i)
    if (root_charges_[i] == root) return static_cast<int>(i);
  throw std::invalid_argument("TreeLayout: root charge not reachable");
}

const std::vector<SectorPath>& TreeLayout::paths(Charge root) const {
  return paths_[static_cast<std::size_t>(root_slot(root))];
}

const std::vector<TreeLayout::Entry>& TreeLayout::basis(Charge root) const {
  return basis_[static_cast<std::size_t>(root_slot(root))];
}

int TreeLayout::position(Charge root, const SectorPath& path,
                         const std::vector<int>& ts) const {
  const int slot = root_slot(root);
  const auto& plist = paths_[static_cast<std::size_t>(slot)];
  int pi = -1;
  for (int i = 0; i < static_cast<int>(plist.size()); ++i)
    if (plist[static_cast<std::size_t>(i)] == path) {
      pi = i;
      break;
    }
  if (pi < 0) throw std::invalid_argument("TreeLayout::position: unknown path");
  const auto& basis = basis_[static_cast<std::size_t>(slot)];
  for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
    const auto& e = basis[static_cast<std::size_t>(i)];
    if (e.path_index == pi && e.ts == ts) return i;
  }
  throw std::invalid_argument("TreeLayout::position: entry not found");
}

}  // namespace symtensor
