// SPDX-License-Identifier: Apache-2.0
#include "symtensor/rep_space.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "symtensor/su2.hpp"

namespace symtensor {

RepSpace::RepSpace(ChargeSystemPtr system, std::vector<Sector> sectors)
    : system_(std::move(system)), sectors_(std::move(sectors)) {
  if (!system_) throw std::invalid_argument("RepSpace: null charge system");
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    if (!system_->valid(sectors_[i].charge))
      throw std::invalid_argument("RepSpace: invalid charge for system " + system_->name());
    if (sectors_[i].degeneracy < 1)
      throw std::invalid_argument("RepSpace: sector degeneracy must be >= 1");
    if (i > 0 && sectors_[i - 1].charge >= sectors_[i].charge)
      throw std::invalid_argument("RepSpace: sector charges must be strictly ascending");
  }
}

int RepSpace::sector_index(Charge c) const {
  auto it = std::lower_bound(sectors_.begin(), sectors_.end(), c,
                             [](const Sector& s, Charge v) { return s.charge < v; });
  if (it == sectors_.end() || it->charge != c) return -1;
  return static_cast<int>(it - sectors_.begin());
}

int RepSpace::degeneracy(Charge c) const {
  const int i = sector_index(c);
  return i < 0 ? 0 : sectors_[static_cast<std::size_t>(i)].degeneracy;
}

int RepSpace::sector_offset(Charge c) const {
  int off = 0;
  for (const auto& s : sectors_) {
    if (s.charge == c) return off;
    off += s.degeneracy * system_->dim(s.charge);
  }
  throw std::invalid_argument("RepSpace::sector_offset: charge not present");
}

int RepSpace::total_dim() const {
  int d = 0;
  for (const auto& s : sectors_) d += s.degeneracy * system_->dim(s.charge);
  return d;
}

RepSpace RepSpace::dual() const {
  std::vector<Sector> out;
  out.reserve(sectors_.size());
  for (const auto& s : sectors_) out.push_back({system_->dual(s.charge), s.degeneracy});
  std::sort(out.begin(), out.end(),
            [](const Sector& a, const Sector& b) { return a.charge < b.charge; });
  return RepSpace(system_, std::move(out));
}

RepSpace make_space(ChargeSystemPtr system,
                    std::initializer_list<std::pair<Charge, int>> sectors) {
  std::vector<RepSpace::Sector> s;
  for (const auto& [c, d] : sectors) s.push_back({c, d});
  return RepSpace(std::move(system), std::move(s));
}

const FuseMap::SourcePair& FuseMap::source(Charge c, int t) const {
  const int ci = product_.sector_index(c);
  if (ci < 0) throw std::invalid_argument("FuseMap::source: charge not in product");
  const auto& list = forward_[static_cast<std::size_t>(ci)];
  if (t < 0 || t >= static_cast<int>(list.size()))
    throw std::invalid_argument("FuseMap::source: coupled index out of range");
  return list[static_cast<std::size_t>(t)];
}

int FuseMap::coupled_index(Charge c, const SourcePair& src) const {
  const int ci = product_.sector_index(c);
  if (ci < 0) throw std::invalid_argument("FuseMap::coupled_index: charge not in product");
  const auto& list = forward_[static_cast<std::size_t>(ci)];
  auto it = std::find(list.begin(), list.end(), src);
  if (it == list.end())
    throw std::invalid_argument("FuseMap::coupled_index: pair not mapped to this charge");
  return static_cast<int>(it - list.begin());
}

std::pair<RepSpace, FuseMap> fuse_spaces(const RepSpace& a, const RepSpace& b) {
  if (a.system()->name() != b.system()->name())
    throw std::invalid_argument("fuse_spaces: mismatched charge systems");
  const auto& sys = *a.system();

  // Enumerate source pairs lexicographically and group stably by total charge.
  std::map<Charge, std::vector<FuseMap::SourcePair>> grouped;
  for (const auto& sa : a.sectors())
    for (int ta = 0; ta < sa.degeneracy; ++ta)
      for (const auto& sb : b.sectors())
        for (int tb = 0; tb < sb.degeneracy; ++tb)
          for (Charge c : sys.fuse(sa.charge, sb.charge))
            grouped[c].push_back({sa.charge, ta, sb.charge, tb});

  std::vector<RepSpace::Sector> sectors;
  FuseMap map;
  map.left_ = a;
  map.right_ = b;
  for (auto& [c, list] : grouped) {
    sectors.push_back({c, static_cast<int>(list.size())});
    map.forward_.push_back(std::move(list));
  }
  RepSpace product(a.system(), std::move(sectors));
  map.product_ = product;
  return {std::move(product), std::move(map)};
}

TotalSpinOps space_generators(const RepSpace& space) {
  if (space.system()->name() != "su2")
    throw std::invalid_argument("space_generators: SU(2) space required");
  const int n = space.total_dim();
  TotalSpinOps ops{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                   Eigen::MatrixXd::Zero(n, n)};
  int off = 0;
  for (const auto& s : space.sectors()) {
    const auto g = real_generators(Spin(s.charge));
    const int dj = s.charge + 1;
    for (int t = 0; t < s.degeneracy; ++t) {
      ops.jx.block(off, off, dj, dj) = g.jx;
      ops.ijy.block(off, off, dj, dj) = g.ijy;
      ops.jz.block(off, off, dj, dj) = g.jz;
      off += dj;
    }
  }
  return ops;
}

TotalSpinOps total_spin_operators(const std::vector<RepSpace>& spaces, long max_dim) {
  long total = 1;
  for (const auto& sp : spaces) {
    total *= sp.total_dim();
    if (total > max_dim)
      throw std::invalid_argument("total_spin_operators: product dimension above oracle limit");
  }
  const int n = static_cast<int>(total);
  TotalSpinOps out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                   Eigen::MatrixXd::Zero(n, n)};
  for (std::size_t l = 0; l < spaces.size(); ++l) {
    const auto g = space_generators(spaces[l]);
    // left/right identity dimensions around site l
    long left = 1, right = 1;
    for (std::size_t i = 0; i < l; ++i) left *= spaces[i].total_dim();
    for (std::size_t i = l + 1; i < spaces.size(); ++i) right *= spaces[i].total_dim();
    const int dl = spaces[l].total_dim();
    auto add_term = [&](Eigen::MatrixXd& acc, const Eigen::MatrixXd& op) {
      for (long il = 0; il < left; ++il)
        for (int r = 0; r < dl; ++r)
          for (int c = 0; c < dl; ++c) {
            if (op(r, c) == 0.0) continue;
            const long row0 = (il * dl + r) * right;
            const long col0 = (il * dl + c) * right;
            for (long ir = 0; ir < right; ++ir)
              acc(row0 + ir, col0 + ir) += op(r, c);
          }
    };
    add_term(out.jx, g.jx);
    add_term(out.ijy, g.ijy);
    add_term(out.jz, g.jz);
  }
  return out;
}

}  // namespace symtensor
