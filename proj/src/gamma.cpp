// SPDX-License-Identifier: Apache-2.0
#include "symtensor/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>

#include "symtensor/counters.hpp"
#include "symtensor/serialize.hpp"

namespace symtensor {

namespace {

constexpr double kPrune = 1e-14;

Charge line_charge(const FusionTree& tree, const SectorPath& p, int id) {
  return id < tree.leaf_count() ? p.leaves[static_cast<std::size_t>(id)]
                                : p.internals[static_cast<std::size_t>(id - tree.leaf_count())];
}

/// Working state of a Gamma build: the current tree, the current leaf order
/// (position -> input leg), and the expansion of every input path in the
/// current path basis.
struct BuildState {
  ChargeSystemPtr sys;
  FusionTree tree;
  std::vector<int> leaf_of_pos;
  std::vector<SectorPath> cur_paths;
  std::map<SectorPath, int> cur_index;
  std::vector<std::map<int, double>> cols;  // per input path

  void replace_paths(std::vector<std::vector<std::pair<SectorPath, double>>> expansion,
                     FusionTree new_tree) {
    std::map<SectorPath, int> nindex;
    std::vector<SectorPath> npaths;
    for (const auto& terms : expansion)
      for (const auto& [p, c] : terms)
        if (nindex.emplace(p, 0).second) npaths.push_back(p);
    std::sort(npaths.begin(), npaths.end());
    for (int i = 0; i < static_cast<int>(npaths.size()); ++i)
      nindex[npaths[static_cast<std::size_t>(i)]] = i;

    std::vector<std::map<int, double>> ncols(cols.size());
    for (std::size_t in = 0; in < cols.size(); ++in)
      for (const auto& [cur, alpha] : cols[in])
        for (const auto& [p, c] : expansion[static_cast<std::size_t>(cur)]) {
          const double v = alpha * c;
          if (v != 0.0) ncols[in][nindex.at(p)] += v;
        }
    tree = std::move(new_tree);
    cur_paths = std::move(npaths);
    cur_index = std::move(nindex);
    cols = std::move(ncols);
  }

  /// ((A,B)e, C)d -> (A,(B,C)f)d at nodes (n1 = inner, n2 = outer); the
  /// direction used by adjacent swaps before the R move.
  void rotate_right(int n1, int n2) {
    const int k = tree.leaf_count();
    auto nodes = tree.nodes();
    const int a_id = nodes[static_cast<std::size_t>(n1)].left;
    const int b_id = nodes[static_cast<std::size_t>(n1)].right;
    const int c_id = nodes[static_cast<std::size_t>(n2)].right;
    nodes[static_cast<std::size_t>(n1)] = {b_id, c_id};
    nodes[static_cast<std::size_t>(n2)] = {a_id, k + n1};
    FusionTree nt(k, std::move(nodes));

    std::vector<std::vector<std::pair<SectorPath, double>>> exp(cur_paths.size());
    for (std::size_t i = 0; i < cur_paths.size(); ++i) {
      const auto& p = cur_paths[i];
      const Charge a = line_charge(tree, p, a_id);
      const Charge b = line_charge(tree, p, b_id);
      const Charge c = line_charge(tree, p, c_id);
      const Charge e = p.internals[static_cast<std::size_t>(n1)];
      const Charge d = p.internals[static_cast<std::size_t>(n2)];
      for (Charge f : sys->fuse(b, c)) {
        const double coeff = sys->f_coeff(a, b, c, d, e, f);
        if (std::abs(coeff) <= kPrune) continue;
        SectorPath q = p;
        q.internals[static_cast<std::size_t>(n1)] = f;
        exp[i].emplace_back(std::move(q), coeff);
      }
    }
    replace_paths(std::move(exp), std::move(nt));
  }

  /// (A,(B,C)f)d -> ((A,B)e, C)d; the comb-normalizing direction.
  void rotate_left(int n1, int n2) {
    const int k = tree.leaf_count();
    auto nodes = tree.nodes();
    const int a_id = nodes[static_cast<std::size_t>(n2)].left;
    const int b_id = nodes[static_cast<std::size_t>(n1)].left;
    const int c_id = nodes[static_cast<std::size_t>(n1)].right;
    nodes[static_cast<std::size_t>(n1)] = {a_id, b_id};
    nodes[static_cast<std::size_t>(n2)] = {k + n1, c_id};
    FusionTree nt(k, std::move(nodes));

    std::vector<std::vector<std::pair<SectorPath, double>>> exp(cur_paths.size());
    for (std::size_t i = 0; i < cur_paths.size(); ++i) {
      const auto& p = cur_paths[i];
      const Charge a = line_charge(tree, p, a_id);
      const Charge b = line_charge(tree, p, b_id);
      const Charge c = line_charge(tree, p, c_id);
      const Charge f = p.internals[static_cast<std::size_t>(n1)];
      const Charge d = p.internals[static_cast<std::size_t>(n2)];
      for (Charge e : sys->fuse(a, b)) {
        const double coeff = sys->f_coeff(a, b, c, d, e, f);
        if (std::abs(coeff) <= kPrune) continue;
        SectorPath q = p;
        q.internals[static_cast<std::size_t>(n1)] = e;
        exp[i].emplace_back(std::move(q), coeff);
      }
    }
    replace_paths(std::move(exp), std::move(nt));
  }

  /// Swap two adjacent leaves that share node n (both operands are leaves).
  void swap_at_node(int n) {
    const auto& node = tree.nodes()[static_cast<std::size_t>(n)];
    const int pos_l = node.left, pos_r = node.right;
    if (pos_l >= tree.leaf_count() || pos_r >= tree.leaf_count())
      throw std::logic_error("swap_at_node: operands must be leaves");
    std::vector<std::vector<std::pair<SectorPath, double>>> exp(cur_paths.size());
    for (std::size_t i = 0; i < cur_paths.size(); ++i) {
      const auto& p = cur_paths[i];
      const Charge a = p.leaves[static_cast<std::size_t>(pos_l)];
      const Charge b = p.leaves[static_cast<std::size_t>(pos_r)];
      const Charge c = p.internals[static_cast<std::size_t>(n)];
      SectorPath q = p;
      std::swap(q.leaves[static_cast<std::size_t>(pos_l)],
                q.leaves[static_cast<std::size_t>(pos_r)]);
      exp[i].emplace_back(std::move(q), sys->r_coeff(a, b, c));
    }
    replace_paths(std::move(exp), FusionTree(tree));
    std::swap(leaf_of_pos[static_cast<std::size_t>(pos_l)],
              leaf_of_pos[static_cast<std::size_t>(pos_r)]);
  }

  /// Rotate the tree to left-comb shape (every right operand a leaf), then
  /// relabel node indices to the canonical comb.
  void normalize_to_comb() {
    const int k = tree.leaf_count();
    for (;;) {
      int n2 = -1;
      for (int n = 0; n < tree.node_count(); ++n)
        if (tree.nodes()[static_cast<std::size_t>(n)].right >= k) {
          n2 = n;
          break;
        }
      if (n2 < 0) break;
      rotate_left(tree.nodes()[static_cast<std::size_t>(n2)].right - k, n2);
    }
    // Canonical relabel: the node whose span is [0, m+2) becomes node m.
    std::vector<int> relabel(static_cast<std::size_t>(tree.node_count()));
    for (int n = 0; n < tree.node_count(); ++n) {
      const auto [a, b] = tree.span(k + n);
      if (a != 0) throw std::logic_error("normalize_to_comb: not a comb");
      relabel[static_cast<std::size_t>(n)] = b - 2;
    }
    std::vector<std::vector<std::pair<SectorPath, double>>> exp(cur_paths.size());
    for (std::size_t i = 0; i < cur_paths.size(); ++i) {
      SectorPath q = cur_paths[i];
      for (int n = 0; n < tree.node_count(); ++n)
        q.internals[static_cast<std::size_t>(relabel[static_cast<std::size_t>(n)])] =
            cur_paths[i].internals[static_cast<std::size_t>(n)];
      exp[i].emplace_back(std::move(q), 1.0);
    }
    replace_paths(std::move(exp), left_comb(k));
  }

  /// Swap the leaves at positions (q, q+1) of the canonical comb.
  void swap_positions(int q) {
    if (q == 0) {
      swap_at_node(0);
      return;
    }
    rotate_right(q - 1, q);
    swap_at_node(q - 1);
    rotate_left(q - 1, q);
  }
};

BuildState make_state(const FusionTree& tau, const std::vector<RepSpace>& spaces,
                      Charge root) {
  BuildState st;
  st.sys = spaces.front().system();
  st.tree = tau;
  st.leaf_of_pos.resize(spaces.size());
  for (std::size_t i = 0; i < spaces.size(); ++i) st.leaf_of_pos[i] = static_cast<int>(i);
  st.cur_paths = enumerate_paths(tau, spaces, root);
  for (int i = 0; i < static_cast<int>(st.cur_paths.size()); ++i)
    st.cur_index[st.cur_paths[static_cast<std::size_t>(i)]] = i;
  st.cols.resize(st.cur_paths.size());
  for (std::size_t i = 0; i < st.cur_paths.size(); ++i)
    st.cols[i][static_cast<int>(i)] = 1.0;
  return st;
}

GammaMap finalize(BuildState&& st, const FusionTree& tau_in,
                  const std::vector<SectorPath>& in_paths, const std::vector<int>& perm,
                  Charge root) {
  std::vector<std::vector<GammaMap::Term>> table(in_paths.size());
  for (std::size_t i = 0; i < st.cols.size(); ++i)
    for (const auto& [out, c] : st.cols[i])
      if (std::abs(c) > kPrune) table[i].push_back({out, c});
  GammaMap g = GammaMap::from_parts(tau_in, st.tree, perm, root, in_paths,
                                    st.cur_paths, std::move(table));
  counters::add_gamma_build();
  counters::add_spin_networks(g.stored_coefficients());
  return g;
}

}  // namespace

GammaMap GammaMap::from_parts(FusionTree tree_in, FusionTree tree_out,
                              std::vector<int> perm, Charge root,
                              std::vector<SectorPath> in_paths,
                              std::vector<SectorPath> out_paths,
                              std::vector<std::vector<Term>> table) {
  GammaMap g;
  g.tree_in_ = std::move(tree_in);
  g.tree_out_ = std::move(tree_out);
  g.perm_ = std::move(perm);
  g.root_ = root;
  g.in_paths_ = std::move(in_paths);
  g.out_paths_ = std::move(out_paths);
  g.table_ = std::move(table);
  g.rebuild_indices();
  return g;
}

void GammaMap::rebuild_indices() {
  in_index_.clear();
  out_index_.clear();
  for (int i = 0; i < static_cast<int>(in_paths_.size()); ++i)
    in_index_[in_paths_[static_cast<std::size_t>(i)]] = i;
  for (int i = 0; i < static_cast<int>(out_paths_.size()); ++i)
    out_index_[out_paths_[static_cast<std::size_t>(i)]] = i;
}

int GammaMap::in_path_index(const SectorPath& p) const {
  auto it = in_index_.find(p);
  return it == in_index_.end() ? -1 : it->second;
}

int GammaMap::out_path_index(const SectorPath& p) const {
  auto it = out_index_.find(p);
  return it == out_index_.end() ? -1 : it->second;
}

double GammaMap::coefficient(const SectorPath& in, const SectorPath& out) const {
  const int i = in_path_index(in);
  if (i < 0) return 0.0;
  const int o = out_path_index(out);
  if (o < 0) return 0.0;
  for (const auto& t : table_[static_cast<std::size_t>(i)])
    if (t.out_path == o) return t.coeff;
  return 0.0;
}

long GammaMap::stored_coefficients() const {
  long n = 0;
  for (const auto& col : table_) n += static_cast<long>(col.size());
  return n;
}

GammaMap GammaMap::transposed() const {
  GammaMap g;
  g.tree_in_ = tree_out_;
  g.tree_out_ = tree_in_;
  g.root_ = root_;
  g.perm_.resize(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i)
    g.perm_[static_cast<std::size_t>(perm_[i])] = static_cast<int>(i);
  g.in_paths_ = out_paths_;
  g.out_paths_ = in_paths_;
  g.table_.resize(g.in_paths_.size());
  for (std::size_t i = 0; i < table_.size(); ++i)
    for (const auto& t : table_[i])
      g.table_[static_cast<std::size_t>(t.out_path)].push_back({static_cast<int>(i), t.coeff});
  g.rebuild_indices();
  return g;
}

GammaMap GammaMap::composed_after(const GammaMap& other) const {
  if (other.out_paths_.size() != in_paths_.size())
    throw std::invalid_argument("GammaMap::composed_after: path spaces do not chain");
  GammaMap g;
  g.tree_in_ = other.tree_in_;
  g.tree_out_ = tree_out_;
  g.root_ = root_;
  g.perm_.resize(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i)
    g.perm_[i] = other.perm_[static_cast<std::size_t>(perm_[i])];
  g.in_paths_ = other.in_paths_;
  g.out_paths_ = out_paths_;
  g.table_.resize(g.in_paths_.size());
  for (std::size_t i = 0; i < other.table_.size(); ++i) {
    std::map<int, double> acc;
    for (const auto& t1 : other.table_[i]) {
      // other's out paths must equal this->in paths as sets
      const int mid = in_path_index(other.out_paths_[static_cast<std::size_t>(t1.out_path)]);
      if (mid < 0) continue;
      for (const auto& t2 : table_[static_cast<std::size_t>(mid)])
        acc[t2.out_path] += t1.coeff * t2.coeff;
    }
    for (const auto& [o, c] : acc)
      if (std::abs(c) > kPrune) g.table_[i].push_back({o, c});
  }
  g.rebuild_indices();
  return g;
}

GammaMap gamma_permute(const FusionTree& tau, const std::vector<int>& perm,
                       const FusionTree& tau_prime,
                       const std::vector<RepSpace>& leaf_spaces, Charge root) {
  const int k = tau.leaf_count();
  if (static_cast<int>(leaf_spaces.size()) != k)
    throw std::invalid_argument("gamma_permute: one space per leaf required");
  if (tau_prime.leaf_count() != k)
    throw std::invalid_argument("gamma_permute: trees over different leaf counts");
  {
    std::vector<int> seen(static_cast<std::size_t>(k), 0);
    if (static_cast<int>(perm.size()) != k)
      throw std::invalid_argument("gamma_permute: invalid permutation");
    for (int p : perm)
      if (p < 0 || p >= k || seen[static_cast<std::size_t>(p)]++)
        throw std::invalid_argument("gamma_permute: invalid permutation");
  }

  const auto in_paths = enumerate_paths(tau, leaf_spaces, root);
  BuildState st = make_state(tau, leaf_spaces, root);

  if (k == 1) return finalize(std::move(st), tau, in_paths, perm, root);

  st.normalize_to_comb();

  // Bubble the leaf order into the target order by adjacent swaps.
  for (int i = 0; i < k; ++i) {
    int j = i;
    while (st.leaf_of_pos[static_cast<std::size_t>(j)] != perm[static_cast<std::size_t>(i)]) ++j;
    for (; j > i; --j) st.swap_positions(j - 1);
  }

  // Rotate the permuted comb into tau_prime by inverting tau_prime -> comb.
  std::vector<RepSpace> out_spaces;
  out_spaces.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out_spaces.push_back(leaf_spaces[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
  BuildState scratch = make_state(tau_prime, out_spaces, root);
  const auto tau_prime_paths = scratch.cur_paths;
  scratch.normalize_to_comb();

  // scratch columns give S: v_comb = S v_tau'; the inverse is the transpose.
  std::vector<std::map<int, double>> srows(scratch.cur_paths.size());
  for (std::size_t j = 0; j < scratch.cols.size(); ++j)
    for (const auto& [comb_idx, beta] : scratch.cols[j])
      srows[static_cast<std::size_t>(comb_idx)][static_cast<int>(j)] = beta;

  std::vector<std::map<int, double>> final_cols(st.cols.size());
  for (std::size_t in = 0; in < st.cols.size(); ++in)
    for (const auto& [cur, alpha] : st.cols[in]) {
      const int comb_idx =
          scratch.cur_index.count(st.cur_paths[static_cast<std::size_t>(cur)])
              ? scratch.cur_index.at(st.cur_paths[static_cast<std::size_t>(cur)])
              : -1;
      if (comb_idx < 0) continue;
      for (const auto& [j, beta] : srows[static_cast<std::size_t>(comb_idx)])
        final_cols[in][j] += alpha * beta;
    }

  BuildState out;
  out.sys = st.sys;
  out.tree = tau_prime;
  out.leaf_of_pos = st.leaf_of_pos;
  out.cur_paths = tau_prime_paths;
  for (int i = 0; i < static_cast<int>(out.cur_paths.size()); ++i)
    out.cur_index[out.cur_paths[static_cast<std::size_t>(i)]] = i;
  out.cols = std::move(final_cols);
  return finalize(std::move(out), tau, in_paths, perm, root);
}

GammaMap gamma_recouple(const FusionTree& tau, const FusionTree& tau_prime,
                        const std::vector<RepSpace>& leaf_spaces, Charge root) {
  std::vector<int> identity(static_cast<std::size_t>(tau.leaf_count()));
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<int>(i);
  return gamma_permute(tau, identity, tau_prime, leaf_spaces, root);
}

double evaluate_spin_network(const FusionTree& tau, const SectorPath& in,
                             const std::vector<int>& perm, const FusionTree& tau_prime,
                             const SectorPath& out,
                             const std::vector<RepSpace>& leaf_spaces) {
  const Charge root = in.root(tau);
  if (out.root(tau_prime) != root) return 0.0;
  const auto g = GammaCache::global().get_or_build(tau, perm, tau_prime, leaf_spaces, root);
  return g->coefficient(in, out);
}

double reversal_factor(const ChargeSystem& sys, Charge tree_charge, Direction from,
                       Direction to) {
  if (from == to) return 1.0;
  const double d = static_cast<double>(sys.dim(tree_charge));
  const bool from_out = from == Direction::Out;
  const bool to_out = to == Direction::Out;
  if (from_out && !to_out) return 1.0 / std::sqrt(d);
  if (!from_out && to_out) return std::sqrt(d);
  // In <-> InR: the transposed pairing differs by the Frobenius-Schur sign.
  return sys.frobenius_schur(tree_charge);
}

struct GammaCache::Impl {
  std::shared_mutex mtx;
  std::map<std::string, std::shared_ptr<const GammaMap>> mem;
};

std::shared_ptr<GammaCache::Impl> GammaCache::make_impl() {
  return std::make_shared<Impl>();
}

GammaCache& GammaCache::global() {
  static GammaCache cache;
  return cache;
}

std::string gamma_cache_key(const FusionTree& tau, const std::vector<int>& perm,
                            const FusionTree& tau_prime,
                            const std::vector<RepSpace>& leaf_spaces, Charge root) {
  std::ostringstream os;
  os << "gamma-v1|" << leaf_spaces.front().system()->name() << "|r" << root << "|k"
     << tau.leaf_count() << "|t1";
  for (const auto& n : tau.nodes()) os << ' ' << n.left << ',' << n.right;
  os << "|p";
  for (int p : perm) os << ' ' << p;
  os << "|t2";
  for (const auto& n : tau_prime.nodes()) os << ' ' << n.left << ',' << n.right;
  os << "|s";
  for (const auto& sp : leaf_spaces) {
    os << '[';
    for (const auto& s : sp.sectors()) os << s.charge << ':' << s.degeneracy << ';';
    os << ']';
  }
  return os.str();
}

std::shared_ptr<const GammaMap> GammaCache::get_or_build(
    const FusionTree& tau, const std::vector<int>& perm, const FusionTree& tau_prime,
    const std::vector<RepSpace>& leaf_spaces, Charge root) {
  const std::string key = gamma_cache_key(tau, perm, tau_prime, leaf_spaces, root);
  {
    std::shared_lock lock(impl_->mtx);
    auto it = impl_->mem.find(key);
    if (it != impl_->mem.end()) {
      counters::add_gamma_cache_hit();
      return it->second;
    }
  }
  if (!disk_dir_.empty()) {
    auto loaded = load_gamma_from_disk(disk_dir_, key);
    if (loaded) {
      counters::add_gamma_disk_hit();
      std::unique_lock lock(impl_->mtx);
      auto [it, ok] = impl_->mem.emplace(key, std::move(loaded));
      return it->second;
    }
  }
  auto built = std::make_shared<const GammaMap>(
      gamma_permute(tau, perm, tau_prime, leaf_spaces, root));
  if (!disk_dir_.empty()) save_gamma_to_disk(disk_dir_, key, *built);
  std::unique_lock lock(impl_->mtx);
  auto [it, ok] = impl_->mem.emplace(key, std::move(built));
  return it->second;
}

}  // namespace symtensor
