// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace symtensor {

/// Charge label. The meaning depends on the charge system: twice the spin for
/// SU(2), an additive integer for U(1), fermion parity 0/1 for Z2.
using Charge = int;

/// Abstract multiplicity-free charge system: fusion rules, recoupling F,
/// swap R, quantum dimensions, duals. Instances are immutable and shareable.
class ChargeSystem {
 public:
  virtual ~ChargeSystem() = default;

  virtual const std::string& name() const = 0;
  virtual bool valid(Charge c) const = 0;
  virtual Charge trivial() const = 0;
  virtual Charge dual(Charge c) const = 0;
  virtual int dim(Charge c) const = 0;

  /// Output charges of a x b, strictly ascending, each at most once.
  virtual std::vector<Charge> fuse(Charge a, Charge b) const = 0;

  bool fusible(Charge a, Charge b, Charge c) const;

  /// Recoupling coefficient F^{e f}_{a b c d} between the coupled bases
  /// ((ab)e, c) -> d and (a, (bc)f) -> d. Zero off the fusion rules.
  virtual double f_coeff(Charge a, Charge b, Charge c, Charge d, Charge e,
                         Charge f) const = 0;

  /// Swap factor for exchanging the two inputs of a fusion node a x b -> c.
  virtual double r_coeff(Charge a, Charge b, Charge c) const = 0;

  /// Per-node factor picked up when every line of a fusion node is conjugated
  /// with the singlet intertwiner; used by the adjoint of a tensor.
  virtual double conj_node_factor(Charge a, Charge b, Charge c) const = 0;

  /// Frobenius-Schur sign of the self-duality pairing: the transposed cup
  /// equals this sign times the cup. (-1)^{2j} for SU(2), +1 for the Abelian
  /// systems shipped here.
  virtual double frobenius_schur(Charge c) const = 0;

  /// Matrix of the duality intertwiner V_dual(c) (x) V_c -> trivial, rows over
  /// the dual line, columns over the leg; identity-normalized so that a
  /// rank-2 (in,out) invariant tensor stores plain Schur blocks.
  virtual Eigen::MatrixXd leg_intertwiner(Charge c) const = 0;
};

using ChargeSystemPtr = std::shared_ptr<const ChargeSystem>;

/// SU(2): charges are twice_j >= 0; fusion by the triangle rule; F and R from
/// the exact kernels.
ChargeSystemPtr su2_system();

/// U(1): integer charges, fuse(n,m) = {n+m}, all structural data trivial.
ChargeSystemPtr u1_system();

/// Z2 fermion parity: charges {0,1}, fusion mod 2, F = 1, R(1,1->0) = -1.
ChargeSystemPtr z2_fermion_system();

/// Lookup by the CLI config name: "su2" | "u1" | "z2f".
ChargeSystemPtr charge_system_by_name(const std::string& name);

}  // namespace symtensor
