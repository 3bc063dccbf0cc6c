// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace symtensor {

/// An SU(2) spin label j, stored as 2j so that half-integers are exact.
struct Spin {
  int twice_j = 0;

  Spin() = default;
  explicit constexpr Spin(int tj) : twice_j(tj) {}
  static constexpr Spin from_twice(int tj) { return Spin(tj); }

  constexpr int dim() const { return twice_j + 1; }
  constexpr bool is_integer() const { return twice_j % 2 == 0; }
  friend constexpr bool operator==(Spin a, Spin b) { return a.twice_j == b.twice_j; }
  friend constexpr auto operator<=>(Spin a, Spin b) { return a.twice_j <=> b.twice_j; }
};

/// A projection quantum number m, stored as 2m.
struct SpinProjection {
  int twice_m = 0;

  SpinProjection() = default;
  explicit constexpr SpinProjection(int tm) : twice_m(tm) {}

  constexpr bool valid_for(Spin j) const {
    return std::abs(twice_m) <= j.twice_j && (twice_m - j.twice_j) % 2 == 0;
  }
  friend constexpr bool operator==(SpinProjection a, SpinProjection b) = default;
};

/// True iff (j_a, j_b, j_c) satisfy the triangle rule and add up to an integer.
bool triangle_ok(Spin ja, Spin jb, Spin jc);

/// Clebsch-Gordan coefficient <j_a m_a; j_b m_b | j_c m_c> in the
/// Condon-Shortley convention. Zero when the triangle rule or the
/// m-selection rule fails.
double cg_coefficient(Spin ja, SpinProjection ma, Spin jb, SpinProjection mb,
                      Spin jc, SpinProjection mc);

/// Dense block of Clebsch-Gordan coefficients for a fixed spin triple.
/// Entries are indexed by m in ascending order, -j..j on each axis.
struct CGBlock {
  Spin ja, jb, jc;
  std::vector<double> data;  // row-major over (m_a, m_b, m_c)

  double at(int ia, int ib, int ic) const {
    return data[static_cast<std::size_t>((ia * jb.dim() + ib) * jc.dim() + ic)];
  }
  double at_m(SpinProjection ma, SpinProjection mb, SpinProjection mc) const {
    return at((ma.twice_m + ja.twice_j) / 2, (mb.twice_m + jb.twice_j) / 2,
              (mc.twice_m + jc.twice_j) / 2);
  }
};

/// All CG coefficients of a triple, memoized; an incompatible triple gives an
/// all-zero block.
const CGBlock& cg_block(Spin ja, Spin jb, Spin jc);

/// The reverse-diagonal singlet matrix omega_j, (omega_j)_{m,-m} = (-1)^{j-m}/sqrt(2j+1),
/// with rows and columns ordered by ascending m.
Eigen::MatrixXd omega(Spin j);

/// cup(j) = sqrt(2j+1) * omega_j, entries (-1)^{j-m}; reverses an outgoing index.
Eigen::MatrixXd cup(Spin j);

/// cap(j) = (-1)^{2j} sqrt(2j+1) * omega_j; inverts the action of the cup.
Eigen::MatrixXd cap(Spin j);

/// Wigner 6-j symbol {j1 j2 j3; j4 j5 j6} by the Racah sum.
double wigner6j(Spin j1, Spin j2, Spin j3, Spin j4, Spin j5, Spin j6);

/// Recoupling coefficient F^{je jf}_{ja jb jc jd} relating the coupled bases
/// ((ab)e, c)d and (a, (bc)f)d:
///   F = (-1)^{ja+jb+jc+jd} sqrt((2je+1)(2jf+1)) {ja jb je; jc jd jf}.
/// Zero when any triangle condition fails. Memoized.
double recoupling_f(Spin ja, Spin jb, Spin jc, Spin jd, Spin je, Spin jf);

/// Swap factor (-1)^{ja+jb-jc} picked up when the two fused inputs of a node
/// are exchanged.
double swap_r(Spin ja, Spin jb, Spin jc);

/// Spin generators on the 2j+1 dimensional irrep, basis ordered by ascending m.
/// Jz is real diagonal, Jx real symmetric, Jy imaginary antisymmetric.
struct Generators {
  Eigen::MatrixXcd jx, jy, jz;
};
Generators generators(Spin j);

/// Real version: {Jx, i*Jy, Jz}; all three are real and satisfy the same
/// block-sum identities, convenient for real invariance checks.
struct RealGenerators {
  Eigen::MatrixXd jx, ijy, jz;
};
RealGenerators real_generators(Spin j);

namespace detail {
/// Number of CG blocks and F values computed so far (cache misses), for tests
/// of the memoization contract.
long cg_blocks_computed();
long f_values_computed();
}  // namespace detail

}  // namespace symtensor
