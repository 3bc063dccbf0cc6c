// SPDX-License-Identifier: Apache-2.0
#include "symtensor/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "symtensor/counters.hpp"
#include "symtensor/su2.hpp"

namespace symtensor {

/// Private-access shim for the operation implementations.
class SymTensorOps {
 public:
  static std::map<SectorPath, DenseTensorD>& blocks(SymTensor& t) { return t.blocks_; }
  static void set_declared(SymTensor& t, std::vector<Direction> d) {
    t.declared_ = std::move(d);
  }
  static void set_storage(SymTensor& t, std::vector<Direction> s) {
    t.storage_ = std::move(s);
  }
};

namespace {

OpAuditHook g_audit;

void audit(const SymTensor& t, const char* op) {
  if (g_audit) g_audit(t, op);
}

/// Structural tensor node: Clebsch-Gordan block for SU(2), the scalar 1 for
/// Abelian charges.
DenseTensorD node_tensor(const ChargeSystem& sys, Charge a, Charge b, Charge c) {
  const int da = sys.dim(a), db = sys.dim(b), dc = sys.dim(c);
  if (da == 1 && db == 1 && dc == 1) {
    DenseTensorD one({1, 1, 1});
    one[0] = 1.0;
    return one;
  }
  if (sys.name() != "su2")
    throw std::logic_error("node_tensor: no structural data for system " + sys.name());
  const CGBlock& blk = cg_block(Spin(a), Spin(b), Spin(c));
  DenseTensorD out({da, db, dc});
  out.data() = blk.data;
  return out;
}

/// Dense structural tensor of one path: axes are the leaf projection indices
/// in leaf order, plus a trailing root projection axis when the root charge
/// is nontrivial. The given directions determine the duality attachments.
DenseTensorD build_structural(const ChargeSystem& sys, const FusionTree& tree,
                              const SectorPath& path,
                              const std::vector<Direction>& dirs, Charge root) {
  const int k = tree.leaf_count();
  auto line_charge = [&](int id) {
    return id < k ? path.leaves[static_cast<std::size_t>(id)]
                  : path.internals[static_cast<std::size_t>(id - k)];
  };

  // Per line: tensor with axes [line m, leaf m's over its span...].
  std::vector<DenseTensorD> lines(static_cast<std::size_t>(k + tree.node_count()));
  for (int l = 0; l < k; ++l) {
    const int d = sys.dim(path.leaves[static_cast<std::size_t>(l)]);
    DenseTensorD eye({d, d});
    for (int i = 0; i < d; ++i) eye.at({i, i}) = 1.0;
    lines[static_cast<std::size_t>(l)] = std::move(eye);
  }
  for (int ni : tree.topological_order()) {
    const auto& n = tree.nodes()[static_cast<std::size_t>(ni)];
    const DenseTensorD nt = node_tensor(sys, line_charge(n.left), line_charge(n.right),
                                        line_charge(k + ni));
    // [L,R,out] x [L, leavesL..] -> [R, out, leavesL..]
    DenseTensorD c1 = dense_contract(nt, lines[static_cast<std::size_t>(n.left)], {{0, 0}});
    // [R, out, leavesL..] x [R, leavesR..] -> [out, leavesL.., leavesR..]
    DenseTensorD c2 = dense_contract(c1, lines[static_cast<std::size_t>(n.right)], {{0, 0}});
    lines[static_cast<std::size_t>(k + ni)] = std::move(c2);
  }

  DenseTensorD w = std::move(lines[static_cast<std::size_t>(tree.root_id())]);
  // Move the root axis last; squeeze it for a trivial root.
  std::vector<int> perm;
  for (int l = 1; l < w.rank(); ++l) perm.push_back(l);
  perm.push_back(0);
  w = dense_permute(w, perm);
  if (root == sys.trivial()) {
    DenseTensorD squeezed(std::vector<int>(w.dims().begin(), w.dims().end() - 1));
    squeezed.data() = w.data();
    w = std::move(squeezed);
  }

  // Duality attachment on every In/InR leg.
  for (int l = 0; l < k; ++l) {
    const Direction d = dirs[static_cast<std::size_t>(l)];
    if (d == Direction::Out) continue;
    Eigen::MatrixXd b = sys.leg_intertwiner(path.leaves[static_cast<std::size_t>(l)]);
    if (d == Direction::InR) b = b.transpose().eval();
    w = dense_apply_rows(w, b, l);
  }
  return w;
}

/// Conversion matrix on one sector's projection space for a pending bend.
Eigen::MatrixXd bend_conversion(const ChargeSystem& sys, Charge tree_charge,
                                Direction from, Direction to) {
  const int d = sys.dim(tree_charge);
  const double fs = sys.frobenius_schur(tree_charge);
  const double rd = std::sqrt(static_cast<double>(d));
  if (from == to) return Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd b = sys.leg_intertwiner(tree_charge);
  if (from == Direction::Out && to == Direction::In) return b / rd;
  if (from == Direction::Out && to == Direction::InR) return b.transpose() / rd;
  if (from == Direction::In && to == Direction::Out) return fs * b / rd;
  if (from == Direction::InR && to == Direction::Out) return fs * b.transpose() / rd;
  return fs * Eigen::MatrixXd::Identity(d, d);  // In <-> InR
}

std::vector<int> identity_perm(int k) {
  std::vector<int> p(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i;
  return p;
}

}  // namespace

void set_op_audit_hook(OpAuditHook hook) { g_audit = std::move(hook); }

SymTensor::SymTensor(std::vector<RepSpace> declared_spaces,
                     std::vector<Direction> directions, FusionTree tree, Charge root)
    : declared_(directions), storage_(directions), tree_(std::move(tree)), root_(root) {
  if (declared_spaces.empty()) throw std::invalid_argument("SymTensor: no legs");
  if (declared_spaces.size() != directions.size() ||
      static_cast<int>(declared_spaces.size()) != tree_.leaf_count())
    throw std::invalid_argument("SymTensor: legs, directions and tree disagree");
  sys_ = declared_spaces.front().system();
  for (std::size_t l = 0; l < declared_spaces.size(); ++l) {
    if (declared_spaces[l].system()->name() != sys_->name())
      throw std::invalid_argument("SymTensor: mixed charge systems");
    tree_spaces_.push_back(directions[l] == Direction::Out ? declared_spaces[l]
                                                           : declared_spaces[l].dual());
  }
  if (!sys_->valid(root_)) throw std::invalid_argument("SymTensor: invalid root charge");
}

RepSpace SymTensor::declared_space(int leg) const {
  return declared_[static_cast<std::size_t>(leg)] == Direction::Out
             ? tree_spaces_[static_cast<std::size_t>(leg)]
             : tree_spaces_[static_cast<std::size_t>(leg)].dual();
}

const DenseTensorD* SymTensor::block(const SectorPath& p) const {
  auto it = blocks_.find(p);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<int> SymTensor::block_dims(const SectorPath& p) const {
  std::vector<int> dims;
  for (int l = 0; l < rank(); ++l) {
    const int d = tree_spaces_[static_cast<std::size_t>(l)].degeneracy(
        p.leaves[static_cast<std::size_t>(l)]);
    if (d == 0) throw std::invalid_argument("SymTensor: path charge not in leaf space");
    dims.push_back(d);
  }
  return dims;
}

void SymTensor::set_block(const SectorPath& p, DenseTensorD data) {
  if (p.root(tree_) != root_)
    throw std::invalid_argument("SymTensor::set_block: path root mismatch");
  if (static_cast<int>(p.leaves.size()) != rank() ||
      static_cast<int>(p.internals.size()) != tree_.node_count())
    throw std::invalid_argument("SymTensor::set_block: path shape mismatch");
  if (data.dims() != block_dims(p))
    throw std::invalid_argument("SymTensor::set_block: block shape mismatch");
  auto lc = [&](int id) {
    return id < rank() ? p.leaves[static_cast<std::size_t>(id)]
                       : p.internals[static_cast<std::size_t>(id - rank())];
  };
  for (int ni = 0; ni < tree_.node_count(); ++ni) {
    const auto& n = tree_.nodes()[static_cast<std::size_t>(ni)];
    if (!sys_->fusible(lc(n.left), lc(n.right), lc(rank() + ni)))
      throw std::invalid_argument("SymTensor::set_block: path violates fusion rules");
  }
  blocks_[p] = std::move(data);
}

std::vector<SectorPath> SymTensor::allowed_paths() const {
  return enumerate_paths(tree_, tree_spaces_, root_);
}

long SymTensor::stored_coefficients() const {
  long n = 0;
  for (const auto& [p, b] : blocks_) n += b.size();
  return n;
}

void SymTensor::prune(double eps) {
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    double mx = 0;
    for (const double v : it->second.data()) mx = std::max(mx, std::abs(v));
    it = mx <= eps ? blocks_.erase(it) : std::next(it);
  }
}

DenseTensorD to_dense(const SymTensor& t) {
  const auto& sys = *t.system();
  std::vector<RepSpace> storage_spaces;
  std::vector<int> dims;
  for (int l = 0; l < t.rank(); ++l) {
    storage_spaces.push_back(t.storage_direction(l) == Direction::Out
                                 ? t.tree_space(l)
                                 : t.tree_space(l).dual());
    dims.push_back(t.tree_space(l).total_dim());
  }
  const bool covariant = t.root() != sys.trivial();
  if (covariant) dims.push_back(sys.dim(t.root()));
  DenseTensorD dense(dims);

  std::vector<Direction> storage;
  for (int l = 0; l < t.rank(); ++l) storage.push_back(t.storage_direction(l));

  for (const auto& [path, blockData] : t.blocks()) {
    const DenseTensorD w = build_structural(sys, t.tree(), path, storage, t.root());
    std::vector<int> offs, mdims;
    for (int l = 0; l < t.rank(); ++l) {
      const Charge tc = path.leaves[static_cast<std::size_t>(l)];
      const Charge sc = t.storage_direction(l) == Direction::Out ? tc : sys.dual(tc);
      offs.push_back(storage_spaces[static_cast<std::size_t>(l)].sector_offset(sc));
      mdims.push_back(sys.dim(tc));
    }
    std::vector<int> tidx(static_cast<std::size_t>(t.rank()), 0);
    std::vector<int> full(dims.size());
    for (long tf = 0; tf < blockData.size(); ++tf) {
      const double bval = blockData[tf];
      if (bval != 0.0) {
        std::vector<int> midx(w.dims().size(), 0);
        for (long mf = 0; mf < w.size(); ++mf) {
          const double wval = w[mf];
          if (wval != 0.0) {
            for (int l = 0; l < t.rank(); ++l)
              full[static_cast<std::size_t>(l)] =
                  offs[static_cast<std::size_t>(l)] +
                  tidx[static_cast<std::size_t>(l)] * mdims[static_cast<std::size_t>(l)] +
                  midx[static_cast<std::size_t>(l)];
            if (covariant) full.back() = midx.back();
            dense.at(full) += bval * wval;
          }
          dense_detail::advance(midx, w.dims());
        }
      }
      dense_detail::advance(tidx, blockData.dims());
    }
  }

  // Pending bends attach their conversion matrices.
  for (int l = 0; l < t.rank(); ++l) {
    const Direction from = t.storage_direction(l), to = t.direction(l);
    if (from == to) continue;
    const RepSpace& from_space = storage_spaces[static_cast<std::size_t>(l)];
    const RepSpace to_space =
        to == Direction::Out ? t.tree_space(l) : t.tree_space(l).dual();
    const int n = from_space.total_dim();
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : t.tree_space(l).sectors()) {
      const Charge fc = from == Direction::Out ? s.charge : sys.dual(s.charge);
      const Charge tc = to == Direction::Out ? s.charge : sys.dual(s.charge);
      const Eigen::MatrixXd conv = bend_conversion(sys, s.charge, from, to);
      const int d = sys.dim(s.charge);
      const int fo = from_space.sector_offset(fc), to_off = to_space.sector_offset(tc);
      for (int tt = 0; tt < s.degeneracy; ++tt)
        full.block(fo + tt * d, to_off + tt * d, d, d) = conv;
    }
    dense = dense_apply_rows(dense, full, l);
  }
  return dense;
}

FromDenseResult from_dense(const DenseTensorD& dense,
                           const std::vector<RepSpace>& declared_spaces,
                           const std::vector<Direction>& directions,
                           const FusionTree& tree, Charge root, double tol) {
  SymTensor t(declared_spaces, directions, tree, root);
  const auto& sys = *t.system();
  const bool covariant = root != sys.trivial();
  {
    std::vector<int> expect;
    for (const auto& sp : declared_spaces) expect.push_back(sp.total_dim());
    if (covariant) expect.push_back(sys.dim(root));
    if (dense.dims() != expect)
      throw std::invalid_argument("from_dense: dense dimensions do not match the spaces");
  }

  double dense_max = 0;
  for (double v : dense.data()) dense_max = std::max(dense_max, std::abs(v));

  for (const auto& path : t.allowed_paths()) {
    const DenseTensorD w = build_structural(sys, tree, path, directions, root);
    double wnorm2 = 0;
    for (double v : w.data()) wnorm2 += v * v;
    std::vector<int> offs, mdims;
    for (int l = 0; l < t.rank(); ++l) {
      const Charge tc = path.leaves[static_cast<std::size_t>(l)];
      const Charge sc = directions[static_cast<std::size_t>(l)] == Direction::Out
                            ? tc
                            : sys.dual(tc);
      offs.push_back(declared_spaces[static_cast<std::size_t>(l)].sector_offset(sc));
      mdims.push_back(sys.dim(tc));
    }
    DenseTensorD blk(t.block_dims(path));
    std::vector<int> tidx(static_cast<std::size_t>(t.rank()), 0);
    std::vector<int> full(dense.dims().size());
    double blk_max = 0;
    for (long tf = 0; tf < blk.size(); ++tf) {
      double acc = 0;
      std::vector<int> midx(w.dims().size(), 0);
      for (long mf = 0; mf < w.size(); ++mf) {
        const double wval = w[mf];
        if (wval != 0.0) {
          for (int l = 0; l < t.rank(); ++l)
            full[static_cast<std::size_t>(l)] =
                offs[static_cast<std::size_t>(l)] +
                tidx[static_cast<std::size_t>(l)] * mdims[static_cast<std::size_t>(l)] +
                midx[static_cast<std::size_t>(l)];
          if (covariant) full.back() = midx.back();
          acc += wval * dense.at(full);
        }
        dense_detail::advance(midx, w.dims());
      }
      blk[tf] = acc / wnorm2;
      blk_max = std::max(blk_max, std::abs(blk[tf]));
      dense_detail::advance(tidx, blk.dims());
    }
    if (blk_max > 1e-13 * std::max(1.0, dense_max)) t.set_block(path, std::move(blk));
  }

  const DenseTensorD back = to_dense(t);
  double res2 = 0;
  for (long i = 0; i < dense.size(); ++i) {
    const double d = dense[i] - back[i];
    res2 += d * d;
  }
  const double residual = std::sqrt(res2);
  const double scale = dense.norm();
  if (scale > 0 && residual / scale > tol) {
    std::ostringstream os;
    os << "from_dense: input is not invariant (relative residual " << residual / scale
       << " above tolerance " << tol << ")";
    throw std::invalid_argument(os.str());
  }
  audit(t, "from_dense");
  return {std::move(t), residual};
}

namespace {

SymTensor apply_gamma(const SymTensor& t, const GammaMap& g) {
  std::vector<RepSpace> new_declared;
  std::vector<Direction> new_dirs, new_storage;
  for (int l = 0; l < t.rank(); ++l) {
    const int src = g.perm()[static_cast<std::size_t>(l)];
    new_dirs.push_back(t.direction(src));
    new_storage.push_back(t.storage_direction(src));
    new_declared.push_back(t.direction(src) == Direction::Out ? t.tree_space(src)
                                                              : t.tree_space(src).dual());
  }
  SymTensor out(new_declared, new_dirs, g.tree_out(), t.root());
  SymTensorOps::set_storage(out, new_storage);

  const bool trivial_perm = [&] {
    for (int l = 0; l < t.rank(); ++l)
      if (g.perm()[static_cast<std::size_t>(l)] != l) return false;
    return true;
  }();
  auto& dst = SymTensorOps::blocks(out);
  for (const auto& [path, blk] : t.blocks()) {
    const int i = g.in_path_index(path);
    if (i < 0) throw std::logic_error("apply_gamma: stored path outside the map");
    const auto& terms = g.table()[static_cast<std::size_t>(i)];
    if (terms.empty()) continue;
    const DenseTensorD moved = trivial_perm ? blk : dense_permute(blk, g.perm());
    counters::add_coeffs_touched(static_cast<std::int64_t>(terms.size()) * moved.size());
    for (const auto& term : terms) {
      const SectorPath& op = g.out_paths()[static_cast<std::size_t>(term.out_path)];
      auto it = dst.find(op);
      if (it == dst.end()) {
        DenseTensorD nb = moved;
        for (auto& v : nb.data()) v *= term.coeff;
        dst.emplace(op, std::move(nb));
      } else {
        for (long x = 0; x < moved.size(); ++x) it->second[x] += term.coeff * moved[x];
      }
    }
  }
  return out;
}

}  // namespace

SymTensor new_tree(const SymTensor& t, const FusionTree& tau_prime) {
  if (tau_prime.leaf_count() != t.rank())
    throw std::invalid_argument("new_tree: leaf count mismatch");
  const auto g = GammaCache::global().get_or_build(
      t.tree(), identity_perm(t.rank()), tau_prime, t.tree_spaces(), t.root());
  SymTensor out = apply_gamma(t, *g);
  audit(out, "new_tree");
  return out;
}

SymTensor permute(const SymTensor& t, const std::vector<int>& perm,
                  const FusionTree& tau_prime) {
  if (tau_prime.leaf_count() != t.rank())
    throw std::invalid_argument("permute: leaf count mismatch");
  const auto g = GammaCache::global().get_or_build(t.tree(), perm, tau_prime,
                                                   t.tree_spaces(), t.root());
  SymTensor out = apply_gamma(t, *g);
  audit(out, "permute");
  return out;
}

SymTensor reverse(const SymTensor& t, const std::vector<Direction>& new_directions) {
  if (static_cast<int>(new_directions.size()) != t.rank())
    throw std::invalid_argument("reverse: one direction per leg required");
  SymTensor out = t;
  SymTensorOps::set_declared(out, new_directions);
  audit(out, "reverse");
  return out;
}

SymTensor absorb_bends(const SymTensor& t) {
  if (!t.has_pending_bends()) return t;
  std::vector<RepSpace> declared;
  for (int l = 0; l < t.rank(); ++l) declared.push_back(t.declared_space(l));
  SymTensor out(declared, t.directions(), t.tree(), t.root());
  const auto& sys = *t.system();
  auto& dst = SymTensorOps::blocks(out);
  for (const auto& [path, blk] : t.blocks()) {
    double factor = 1.0;
    for (int l = 0; l < t.rank(); ++l)
      factor *= reversal_factor(sys, path.leaves[static_cast<std::size_t>(l)],
                                t.storage_direction(l), t.direction(l));
    DenseTensorD nb = blk;
    for (auto& v : nb.data()) v *= factor;
    dst.emplace(path, std::move(nb));
  }
  audit(out, "absorb_bends");
  return out;
}

namespace {

struct ExpandedTree {
  FusionTree tree;
  std::vector<int> group_root_id;   // expanded line id per outer leaf
  std::vector<int> outer_node_map;  // outer node index -> expanded node index
};

/// Replace each leaf g of `outer` by a left comb over sizes[g] fine leaves.
ExpandedTree expand_tree(const FusionTree& outer, const std::vector<int>& sizes) {
  const int kout = outer.leaf_count();
  int k = 0;
  for (int s : sizes) k += s;
  std::vector<FusionTree::Node> nodes;
  std::vector<int> group_root(static_cast<std::size_t>(kout));
  int first = 0;
  for (int g = 0; g < kout; ++g) {
    const int s = sizes[static_cast<std::size_t>(g)];
    if (s == 1) {
      group_root[static_cast<std::size_t>(g)] = first;
    } else {
      int line = first;
      for (int i = 1; i < s; ++i) {
        nodes.push_back({line, first + i});
        line = k + static_cast<int>(nodes.size()) - 1;
      }
      group_root[static_cast<std::size_t>(g)] = line;
    }
    first += s;
  }
  const int base = static_cast<int>(nodes.size());
  std::vector<int> node_map(static_cast<std::size_t>(outer.node_count()));
  for (int i = 0; i < outer.node_count(); ++i) {
    const auto& n = outer.nodes()[static_cast<std::size_t>(i)];
    auto mapid = [&](int id) {
      return id < kout ? group_root[static_cast<std::size_t>(id)] : k + base + (id - kout);
    };
    nodes.push_back({mapid(n.left), mapid(n.right)});
    node_map[static_cast<std::size_t>(i)] = base + i;
  }
  return {FusionTree(k, std::move(nodes)), std::move(group_root), std::move(node_map)};
}

}  // namespace

FuseResult fuse(const SymTensor& t_in, const std::vector<LegGroup>& groups,
                const FusionTree& tau_out) {
  SymTensor t = absorb_bends(t_in);
  {
    int pos = 0;
    for (const auto& g : groups) {
      if (g.first != pos || g.count < 1)
        throw std::invalid_argument("fuse: groups must cover the legs in order");
      pos += g.count;
    }
    if (pos != t.rank()) throw std::invalid_argument("fuse: groups must cover all legs");
    if (tau_out.leaf_count() != static_cast<int>(groups.size()))
      throw std::invalid_argument("fuse: output tree must have one leaf per group");
  }

  // Uniform direction per fused group; In groups are reversed to Out first
  // and the fused leg reversed back at the end.
  std::vector<Direction> group_dir(groups.size());
  {
    std::vector<Direction> dirs(t.directions());
    bool flipped = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      group_dir[g] = t.direction(groups[g].first);
      if (groups[g].count == 1) continue;
      for (int l = groups[g].first; l < groups[g].first + groups[g].count; ++l)
        if (t.direction(l) != group_dir[g])
          throw std::invalid_argument("fuse: group directions must be uniform");
      if (group_dir[g] != Direction::Out) {
        for (int l = groups[g].first; l < groups[g].first + groups[g].count; ++l)
          dirs[static_cast<std::size_t>(l)] = Direction::Out;
        flipped = true;
      }
    }
    if (flipped) t = absorb_bends(reverse(t, dirs));
  }

  std::vector<int> sizes;
  for (const auto& g : groups) sizes.push_back(g.count);
  const ExpandedTree ex = expand_tree(tau_out, sizes);
  t = new_tree(t, ex.tree);

  std::vector<RepSpace> new_declared;
  std::vector<Direction> new_dirs;
  std::vector<FuseRecord> records;
  std::vector<std::shared_ptr<const TreeLayout>> layouts(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].count == 1) {
      new_declared.push_back(t.declared_space(groups[g].first));
      new_dirs.push_back(t.direction(groups[g].first));
      continue;
    }
    std::vector<RepSpace> gspaces;
    for (int l = groups[g].first; l < groups[g].first + groups[g].count; ++l)
      gspaces.push_back(t.tree_space(l));
    auto layout = std::make_shared<const TreeLayout>(left_comb(groups[g].count), gspaces);
    layouts[g] = layout;
    new_declared.push_back(layout->coupled_space());
    new_dirs.push_back(Direction::Out);
    records.push_back({left_comb(groups[g].count), gspaces, group_dir[g], layout});
  }

  SymTensor out(new_declared, new_dirs, tau_out, t.root());
  auto& dst = SymTensorOps::blocks(out);

  // Positions of each group's comb nodes inside the expanded tree.
  std::vector<int> first_node(groups.size(), -1);
  {
    int base = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].count >= 2) {
        first_node[g] = base;
        base += groups[g].count - 1;
      }
    }
  }

  for (const auto& [p2, blk] : t.blocks()) {
    SectorPath pout;
    pout.leaves.resize(groups.size());
    pout.internals.resize(static_cast<std::size_t>(tau_out.node_count()));
    for (int i = 0; i < tau_out.node_count(); ++i)
      pout.internals[static_cast<std::size_t>(i)] =
          p2.internals[static_cast<std::size_t>(ex.outer_node_map[static_cast<std::size_t>(i)])];
    std::vector<SectorPath> sub(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int root_id = ex.group_root_id[g];
      pout.leaves[g] = root_id < t.rank()
                           ? p2.leaves[static_cast<std::size_t>(root_id)]
                           : p2.internals[static_cast<std::size_t>(root_id - t.rank())];
      if (groups[g].count >= 2) {
        SectorPath sp;
        for (int l = groups[g].first; l < groups[g].first + groups[g].count; ++l)
          sp.leaves.push_back(p2.leaves[static_cast<std::size_t>(l)]);
        for (int i = 0; i < groups[g].count - 1; ++i)
          sp.internals.push_back(p2.internals[static_cast<std::size_t>(first_node[g] + i)]);
        sub[g] = std::move(sp);
      }
    }
    auto it = dst.find(pout);
    if (it == dst.end()) it = dst.emplace(pout, DenseTensorD(out.block_dims(pout))).first;
    DenseTensorD& nb = it->second;
    counters::add_coeffs_touched(blk.size());

    std::vector<int> tidx(static_cast<std::size_t>(t.rank()), 0);
    std::vector<int> oidx(groups.size(), 0);
    for (long f = 0; f < blk.size(); ++f) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].count == 1) {
          oidx[g] = tidx[static_cast<std::size_t>(groups[g].first)];
        } else {
          std::vector<int> ts(tidx.begin() + groups[g].first,
                              tidx.begin() + groups[g].first + groups[g].count);
          oidx[g] = layouts[g]->position(pout.leaves[g], sub[g], ts);
        }
      }
      nb.at(oidx) = blk[f];
      dense_detail::advance(tidx, blk.dims());
    }
  }

  bool any_in = false;
  std::vector<Direction> final_dirs = new_dirs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].count >= 2 && group_dir[g] != Direction::Out) {
      final_dirs[g] = group_dir[g];
      any_in = true;
    }
  }
  if (any_in) out = absorb_bends(reverse(out, final_dirs));
  audit(out, "fuse");
  return {std::move(out), std::move(records)};
}

SymTensor split(const SymTensor& t_in, int leg, const FuseRecord& record) {
  SymTensor t = absorb_bends(t_in);
  if (leg < 0 || leg >= t.rank()) throw std::invalid_argument("split: bad leg");
  if (record.direction != Direction::Out) {
    if (t.direction(leg) != record.direction)
      throw std::invalid_argument("split: leg direction does not match the record");
    std::vector<Direction> dirs(t.directions());
    dirs[static_cast<std::size_t>(leg)] = Direction::Out;
    t = absorb_bends(reverse(t, dirs));
  }
  const auto& layout = *record.layout;
  if (!(t.tree_space(leg) == layout.coupled_space()))
    throw std::invalid_argument("split: FuseMap inconsistent with the leg space");

  const int count = record.group_tree.leaf_count();
  std::vector<int> sizes(static_cast<std::size_t>(t.rank()), 1);
  sizes[static_cast<std::size_t>(leg)] = count;
  const ExpandedTree ex = expand_tree(t.tree(), sizes);

  std::vector<RepSpace> new_declared;
  std::vector<Direction> new_dirs;
  for (int l = 0; l < t.rank(); ++l) {
    if (l == leg) {
      for (int i = 0; i < count; ++i) {
        new_declared.push_back(record.group_tree_spaces[static_cast<std::size_t>(i)]);
        new_dirs.push_back(Direction::Out);
      }
    } else {
      new_declared.push_back(t.declared_space(l));
      new_dirs.push_back(t.direction(l));
    }
  }
  SymTensor out(new_declared, new_dirs, ex.tree, t.root());
  auto& dst = SymTensorOps::blocks(out);

  for (const auto& [p, blk] : t.blocks()) {
    const Charge cg = p.leaves[static_cast<std::size_t>(leg)];
    const auto& basis = layout.basis(cg);
    const auto& paths = layout.paths(cg);
    counters::add_coeffs_touched(blk.size());
    std::vector<int> tidx(static_cast<std::size_t>(t.rank()), 0);
    for (long f = 0; f < blk.size(); ++f) {
      const auto& entry =
          basis[static_cast<std::size_t>(tidx[static_cast<std::size_t>(leg)])];
      const SectorPath& sp = paths[static_cast<std::size_t>(entry.path_index)];
      SectorPath p2;
      p2.leaves.resize(static_cast<std::size_t>(out.rank()));
      p2.internals.resize(static_cast<std::size_t>(out.tree().node_count()));
      std::vector<int> oidx(static_cast<std::size_t>(out.rank()), 0);
      int w = 0;
      for (int l = 0; l < t.rank(); ++l) {
        if (l == leg) {
          for (int i = 0; i < count; ++i, ++w) {
            p2.leaves[static_cast<std::size_t>(w)] = sp.leaves[static_cast<std::size_t>(i)];
            oidx[static_cast<std::size_t>(w)] = entry.ts[static_cast<std::size_t>(i)];
          }
        } else {
          p2.leaves[static_cast<std::size_t>(w)] = p.leaves[static_cast<std::size_t>(l)];
          oidx[static_cast<std::size_t>(w)] = tidx[static_cast<std::size_t>(l)];
          ++w;
        }
      }
      for (int i = 0; i < count - 1; ++i)
        p2.internals[static_cast<std::size_t>(i)] = sp.internals[static_cast<std::size_t>(i)];
      for (int i = 0; i < t.tree().node_count(); ++i)
        p2.internals[static_cast<std::size_t>(ex.outer_node_map[static_cast<std::size_t>(i)])] =
            p.internals[static_cast<std::size_t>(i)];
      auto it = dst.find(p2);
      if (it == dst.end()) it = dst.emplace(p2, DenseTensorD(out.block_dims(p2))).first;
      it->second.at(oidx) = blk[f];
      dense_detail::advance(tidx, blk.dims());
    }
  }

  if (record.direction != Direction::Out) {
    std::vector<Direction> dirs(out.directions());
    for (int i = 0; i < count; ++i)
      dirs[static_cast<std::size_t>(leg + i)] = record.direction;
    out = absorb_bends(reverse(out, dirs));
  }
  audit(out, "split");
  return out;
}

namespace {

SymTensor make_scalar_tensor(const ChargeSystemPtr& sys, double value) {
  RepSpace triv(sys, {{sys->trivial(), 1}});
  SymTensor out({triv}, {Direction::Out}, FusionTree(1, {}), sys->trivial());
  DenseTensorD blk({1});
  blk[0] = value;
  SectorPath p;
  p.leaves = {sys->trivial()};
  out.set_block(p, std::move(blk));
  return out;
}

}  // namespace

SymTensor contract(const SymTensor& a_in, const SymTensor& b_in,
                   const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("contract: at least one pair required");
  ChargeSystemPtr sysp = a_in.system();
  const auto& sys = *sysp;
  if (a_in.root() != sys.trivial() || b_in.root() != sys.trivial())
    throw std::invalid_argument("contract: only invariant (trivial-root) tensors");

  SymTensor a = absorb_bends(a_in);
  SymTensor b = absorb_bends(b_in);

  std::vector<int> a_con, b_con;
  for (const auto& [x, y] : pairs) {
    if (!(a.declared_space(x) == b.declared_space(y)))
      throw std::invalid_argument("contract: paired legs must carry equal spaces");
    const bool a_out = a.direction(x) == Direction::Out;
    const bool b_out = b.direction(y) == Direction::Out;
    if (a_out == b_out)
      throw std::invalid_argument("contract: paired legs must have opposite directions");
    a_con.push_back(x);
    b_con.push_back(y);
  }
  std::vector<int> a_free, b_free;
  for (int l = 0; l < a.rank(); ++l)
    if (std::find(a_con.begin(), a_con.end(), l) == a_con.end()) a_free.push_back(l);
  for (int l = 0; l < b.rank(); ++l)
    if (std::find(b_con.begin(), b_con.end(), l) == b_con.end()) b_free.push_back(l);
  const int nfa = static_cast<int>(a_free.size());
  const int nfb = static_cast<int>(b_free.size());
  const int ncon = static_cast<int>(a_con.size());

  // Step 1: reverse and permute, contracted legs last on A / first on B.
  std::vector<bool> pair_flipped;
  for (int l : a_con) pair_flipped.push_back(a.direction(l) != Direction::Out);
  std::vector<int> pa = a_free, pb = b_con;
  pa.insert(pa.end(), a_con.begin(), a_con.end());
  pb.insert(pb.end(), b_free.begin(), b_free.end());
  a = permute(a, pa, left_comb(a.rank()));
  b = permute(b, pb, left_comb(b.rank()));
  {
    std::vector<Direction> da(static_cast<std::size_t>(a.rank()), Direction::Out);
    for (int l = 0; l < nfa; ++l) da[static_cast<std::size_t>(l)] = Direction::In;
    a = absorb_bends(reverse(a, da));
    std::vector<Direction> db(static_cast<std::size_t>(b.rank()), Direction::Out);
    for (int l = 0; l < ncon; ++l) db[static_cast<std::size_t>(l)] = Direction::In;
    b = absorb_bends(reverse(b, db));
  }
  // A pair flipped on both sides contracts through two bend conversions whose
  // composite is the Frobenius-Schur sign, not the identity; compensate per
  // path on the A side.
  {
    bool any = false;
    for (bool f : pair_flipped) any = any || f;
    if (any) {
      auto& blocks = SymTensorOps::blocks(a);
      for (auto& [p, blk] : blocks) {
        double fs = 1.0;
        for (int i = 0; i < ncon; ++i)
          if (pair_flipped[static_cast<std::size_t>(i)])
            fs *= sys.frobenius_schur(p.leaves[static_cast<std::size_t>(nfa + i)]);
        if (fs != 1.0)
          for (auto& v : blk.data()) v *= fs;
      }
    }
  }

  // Step 2: reshape both tensors to matrices (or vectors when one side has
  // no free legs).
  std::vector<FuseRecord> rec_a, rec_b;
  if (nfa > 1 || ncon > 1) {
    std::vector<LegGroup> ga;
    if (nfa > 0) ga.push_back({0, nfa});
    ga.push_back({nfa, ncon});
    auto fa = fuse(a, ga, left_comb(static_cast<int>(ga.size())));
    a = std::move(fa.tensor);
    rec_a = std::move(fa.records);
  }
  if (nfb > 1 || ncon > 1) {
    std::vector<LegGroup> gb;
    gb.push_back({0, ncon});
    if (nfb > 0) gb.push_back({ncon, nfb});
    auto fb = fuse(b, gb, left_comb(static_cast<int>(gb.size())));
    b = std::move(fb.tensor);
    rec_b = std::move(fb.records);
  }

  // Alignment of the shared fused index between A's coupled space Y and B's
  // dual-assembled counterpart (a permutation; trivial for self-dual charges).
  std::map<Charge, std::vector<int>> align_cache;
  auto alignment = [&](Charge cy, int dy) -> const std::vector<int>& {
    auto it = align_cache.find(cy);
    if (it != align_cache.end()) return it->second;
    std::vector<int> v(static_cast<std::size_t>(dy));
    bool identity = true;
    if (ncon > 1 && !rec_a.empty() && !rec_b.empty()) {
      const auto& la = *rec_a.back().layout;
      const auto& lb = *rec_b.front().layout;
      for (int tnum = 0; tnum < dy; ++tnum) {
        const auto& ea = la.basis(cy)[static_cast<std::size_t>(tnum)];
        const SectorPath& pp = la.paths(cy)[static_cast<std::size_t>(ea.path_index)];
        SectorPath dualp;
        for (Charge lc : pp.leaves) dualp.leaves.push_back(sys.dual(lc));
        for (Charge ic : pp.internals) dualp.internals.push_back(sys.dual(ic));
        v[static_cast<std::size_t>(tnum)] = lb.position(sys.dual(cy), dualp, ea.ts);
        if (v[static_cast<std::size_t>(tnum)] != tnum) identity = false;
      }
    } else {
      for (int tnum = 0; tnum < dy; ++tnum) v[static_cast<std::size_t>(tnum)] = tnum;
    }
    (void)identity;
    return align_cache.emplace(cy, std::move(v)).first->second;
  };

  // Step 3: blockwise matrix multiplication.
  const bool a_vec = (nfa == 0);
  const bool b_vec = (nfb == 0);
  SymTensor result;

  if (a_vec && b_vec) {
    double s = 0;
    SectorPath p;
    p.leaves = {sys.trivial()};
    const DenseTensorD* va = a.block(p);
    const DenseTensorD* vb = b.block(p);
    if (va && vb) {
      const int d = static_cast<int>(va->size());
      const auto& al = alignment(sys.trivial(), d);
      for (int i = 0; i < d; ++i) s += (*va)[i] * (*vb)[al[static_cast<std::size_t>(i)]];
      counters::add_matmul_flops(d);
    }
    SymTensor out = make_scalar_tensor(sysp, s);
    audit(out, "contract");
    return out;
  }

  if (a_vec) {
    SectorPath pv;
    pv.leaves = {sys.trivial()};
    const DenseTensorD* va = a.block(pv);
    RepSpace wspace = b.tree_space(1);
    SymTensor out({wspace}, {Direction::Out}, FusionTree(1, {}), sys.trivial());
    SectorPath pb;
    pb.leaves = {sys.trivial(), sys.trivial()};
    pb.internals = {sys.trivial()};
    const DenseTensorD* mb = b.block(pb);
    if (va && mb) {
      const int dy = mb->dims()[0], dw = mb->dims()[1];
      const auto& al = alignment(sys.trivial(), dy);
      DenseTensorD blk({dw});
      for (int w = 0; w < dw; ++w) {
        double s = 0;
        for (int y = 0; y < dy; ++y)
          s += (*va)[y] * mb->at({al[static_cast<std::size_t>(y)], w});
        blk[w] = s;
      }
      counters::add_matmul_flops(static_cast<std::int64_t>(dy) * dw);
      SectorPath pw;
      pw.leaves = {sys.trivial()};
      out.set_block(pw, std::move(blk));
    }
    result = std::move(out);
  } else if (b_vec) {
    SectorPath pv;
    pv.leaves = {sys.trivial()};
    const DenseTensorD* vb = b.block(pv);
    RepSpace uspace = a.declared_space(0);
    SymTensor out({uspace}, {Direction::In}, FusionTree(1, {}), sys.trivial());
    SectorPath pa2;
    pa2.leaves = {sys.trivial(), sys.trivial()};
    pa2.internals = {sys.trivial()};
    const DenseTensorD* ma = a.block(pa2);
    if (vb && ma) {
      const int du = ma->dims()[0], dy = ma->dims()[1];
      const auto& al = alignment(sys.trivial(), dy);
      DenseTensorD blk({du});
      for (int u = 0; u < du; ++u) {
        double s = 0;
        for (int y = 0; y < dy; ++y)
          s += ma->at({u, y}) * (*vb)[al[static_cast<std::size_t>(y)]];
        blk[u] = s;
      }
      counters::add_matmul_flops(static_cast<std::int64_t>(du) * dy);
      SectorPath pu;
      pu.leaves = {sys.dual(sys.trivial())};
      out.set_block(pu, std::move(blk));
    }
    result = std::move(out);
  } else {
    RepSpace uspace = a.declared_space(0);
    RepSpace wspace = b.tree_space(1);
    SymTensor out({uspace, wspace}, {Direction::In, Direction::Out}, left_comb(2),
                  sys.trivial());
    for (const auto& [pa2, ma] : a.blocks()) {
      const Charge cy = pa2.leaves[1];
      SectorPath pbk;
      pbk.leaves = {sys.dual(cy), cy};
      pbk.internals = {sys.trivial()};
      const DenseTensorD* mb = b.block(pbk);
      if (!mb) continue;
      const int du = ma.dims()[0], dy = ma.dims()[1], dw = mb->dims()[1];
      const auto& al = alignment(cy, dy);
      DenseTensorD blk({du, dw});
      for (int u = 0; u < du; ++u)
        for (int w = 0; w < dw; ++w) {
          double s = 0;
          for (int y = 0; y < dy; ++y)
            s += ma.at({u, y}) * mb->at({al[static_cast<std::size_t>(y)], w});
          blk.at({u, w}) = s;
        }
      counters::add_matmul_flops(static_cast<std::int64_t>(du) * dy * dw);
      SectorPath pt;
      pt.leaves = {pa2.leaves[0], cy};
      pt.internals = {sys.trivial()};
      out.set_block(pt, std::move(blk));
    }
    result = std::move(out);
  }

  // Steps 4-5: split the fused free legs back and restore directions.
  if (nfb > 1) result = split(result, result.rank() - 1, rec_b.back());
  if (nfa > 1) result = split(result, 0, rec_a.front());

  std::vector<Direction> final_dirs;
  for (int l : a_free) final_dirs.push_back(a_in.direction(l));
  for (int l : b_free) final_dirs.push_back(b_in.direction(l));
  result = absorb_bends(reverse(result, final_dirs));
  result = new_tree(result, left_comb(result.rank()));
  audit(result, "contract");
  return result;
}

double scalar_value(const SymTensor& t) {
  if (t.rank() != 1 || t.tree_space(0).sector_count() != 1 ||
      t.tree_space(0).sectors()[0].charge != t.system()->trivial() ||
      t.tree_space(0).sectors()[0].degeneracy != 1)
    throw std::invalid_argument("scalar_value: not a scalar-shaped tensor");
  SectorPath p;
  p.leaves = {t.system()->trivial()};
  const DenseTensorD* b = t.block(p);
  return b ? (*b)[0] : 0.0;
}

SymTensor add(const SymTensor& a, const SymTensor& b) {
  if (a.rank() != b.rank() || !(a.tree() == b.tree()) || a.root() != b.root() ||
      a.directions() != b.directions())
    throw std::invalid_argument("add: structure mismatch");
  for (int l = 0; l < a.rank(); ++l)
    if (!(a.tree_space(l) == b.tree_space(l)))
      throw std::invalid_argument("add: leg space mismatch");
  SymTensor out = absorb_bends(a);
  SymTensor bb = absorb_bends(b);
  auto& dst = SymTensorOps::blocks(out);
  for (const auto& [p, blk] : bb.blocks()) {
    auto it = dst.find(p);
    if (it == dst.end()) {
      dst.emplace(p, blk);
    } else {
      for (long i = 0; i < blk.size(); ++i) it->second[i] += blk[i];
    }
  }
  audit(out, "add");
  return out;
}

SymTensor scale(const SymTensor& a, double s) {
  SymTensor out = a;
  for (auto& [p, blk] : SymTensorOps::blocks(out))
    for (auto& v : blk.data()) v *= s;
  audit(out, "scale");
  return out;
}

double norm(const SymTensor& a) {
  const SymTensor t = absorb_bends(a);
  const auto& sys = *t.system();
  double s = 0;
  for (const auto& [p, blk] : t.blocks()) {
    double w = sys.dim(t.root());
    for (int l = 0; l < t.rank(); ++l)
      if (t.storage_direction(l) != Direction::Out)
        w *= sys.dim(p.leaves[static_cast<std::size_t>(l)]);
    for (const double v : blk.data()) s += w * v * v;
  }
  return std::sqrt(s);
}

SymTensor conjugated(const SymTensor& t_in) {
  const SymTensor t = absorb_bends(t_in);
  const auto& sys = *t.system();
  if (t.root() != sys.trivial())
    throw std::invalid_argument("conjugated: trivial root required");
  std::vector<RepSpace> declared;
  std::vector<Direction> dirs;
  for (int l = 0; l < t.rank(); ++l) {
    dirs.push_back(t.direction(l) == Direction::Out ? Direction::In : Direction::Out);
    declared.push_back(t.declared_space(l));
  }
  SymTensor out(declared, dirs, t.tree(), t.root());
  auto& dst = SymTensorOps::blocks(out);
  for (const auto& [p, blk] : t.blocks()) {
    SectorPath q;
    for (Charge c : p.leaves) q.leaves.push_back(sys.dual(c));
    for (Charge c : p.internals) q.internals.push_back(sys.dual(c));
    double factor = 1.0;
    for (int l = 0; l < t.rank(); ++l) {
      const Charge c = p.leaves[static_cast<std::size_t>(l)];
      if (t.direction(l) == Direction::Out)
        factor *= sys.frobenius_schur(c);  // Out leg becoming In
      else
        factor *= sys.dim(c);  // In leg becoming Out
    }
    auto lcharge = [&](int id) {
      return id < t.rank() ? p.leaves[static_cast<std::size_t>(id)]
                           : p.internals[static_cast<std::size_t>(id - t.rank())];
    };
    const int root_id = t.tree().root_id();
    for (int ni = 0; ni < t.tree().node_count(); ++ni) {
      const auto& n = t.tree().nodes()[static_cast<std::size_t>(ni)];
      const Charge out_c = lcharge(t.rank() + ni);
      factor *= sys.conj_node_factor(lcharge(n.left), lcharge(n.right), out_c);
      // the singlet pairing handed from one node to its parent is transposed
      if (t.rank() + ni != root_id) factor *= sys.frobenius_schur(out_c);
    }
    DenseTensorD nb = blk;
    for (auto& v : nb.data()) v *= factor;
    dst.emplace(q, std::move(nb));
  }
  audit(out, "conjugated");
  return out;
}

}  // namespace symtensor
