// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "symtensor/charge_system.hpp"

namespace symtensor {

/// A representation space as a direct sum of degenerate charge sectors.
/// Sectors are kept strictly ascending in the system's charge order.
class RepSpace {
 public:
  struct Sector {
    Charge charge;
    int degeneracy;
    friend bool operator==(const Sector&, const Sector&) = default;
  };

  RepSpace() = default;
  RepSpace(ChargeSystemPtr system, std::vector<Sector> sectors);

  const ChargeSystemPtr& system() const { return system_; }
  const std::vector<Sector>& sectors() const { return sectors_; }
  int sector_count() const { return static_cast<int>(sectors_.size()); }

  bool has_charge(Charge c) const { return sector_index(c) >= 0; }
  /// Index of the sector with charge c, or -1.
  int sector_index(Charge c) const;
  /// Degeneracy of charge c (0 when absent).
  int degeneracy(Charge c) const;

  /// Offset of the first basis vector of sector c in the dense realization;
  /// basis layout is sector-major, then degeneracy-major, then m within.
  int sector_offset(Charge c) const;

  int total_dim() const;

  /// The dual space: every sector charge conjugated, re-sorted ascending.
  RepSpace dual() const;

  friend bool operator==(const RepSpace& a, const RepSpace& b) {
    return a.system_->name() == b.system_->name() && a.sectors_ == b.sectors_;
  }

 private:
  ChargeSystemPtr system_;
  std::vector<Sector> sectors_;
};

/// Convenience constructor from (charge, degeneracy) pairs.
RepSpace make_space(ChargeSystemPtr system,
                    std::initializer_list<std::pair<Charge, int>> sectors);

/// The degeneracy-level fusion map X^fuse of a pairwise product A (x) B.
/// For every coupled label (c, t) it records the unique source pair
/// ((c_a, t_a), (c_b, t_b)), and the inverse lookup. Coupled labels within a
/// total charge are ordered by enumerating source pairs lexicographically by
/// (sector index of c_a, t_a, sector index of c_b, t_b); this ordering is
/// normative for every serialized layout downstream.
class FuseMap {
 public:
  struct SourcePair {
    Charge ca;
    int ta;  // 0-based
    Charge cb;
    int tb;
    friend bool operator==(const SourcePair&, const SourcePair&) = default;
  };

  const RepSpace& left() const { return left_; }
  const RepSpace& right() const { return right_; }
  const RepSpace& product() const { return product_; }

  /// Source pair of coupled label (c, t); t is 0-based.
  const SourcePair& source(Charge c, int t) const;
  /// Coupled degeneracy label t of the pair within total charge c.
  int coupled_index(Charge c, const SourcePair& src) const;

  friend std::pair<RepSpace, FuseMap> fuse_spaces(const RepSpace& a, const RepSpace& b);

 private:
  RepSpace left_, right_, product_;
  // per product sector: the ordered list of source pairs
  std::vector<std::vector<SourcePair>> forward_;
};

/// Product space and the deterministic X^fuse bijection.
std::pair<RepSpace, FuseMap> fuse_spaces(const RepSpace& a, const RepSpace& b);

/// Dense total spin operators J_alpha = sum_l 1 x..x J_alpha^(l) x..x 1 on the
/// tensor product of SU(2) spaces, in the real form {Jx, iJy, Jz}. Desk-scale
/// oracle only; throws above max_dim total product dimension.
struct TotalSpinOps {
  Eigen::MatrixXd jx, ijy, jz;
};
TotalSpinOps total_spin_operators(const std::vector<RepSpace>& spaces,
                                  long max_dim = 4096);

/// Block-diagonal generators {Jx, iJy, Jz} of a single reducible SU(2) space,
/// basis layout matching RepSpace::sector_offset.
TotalSpinOps space_generators(const RepSpace& space);

}  // namespace symtensor
