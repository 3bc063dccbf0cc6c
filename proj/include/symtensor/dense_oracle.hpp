// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "symtensor/rep_space.hpp"
#include "symtensor/sym_tensor.hpp"

namespace symtensor {

/// Max over the three generators of || sum_l rho_alpha^(l) T || where rho is
/// J_alpha on Out legs and -J_alpha^T on In legs (infinitesimal invariance);
/// for a nontrivial root the trailing root axis counts as an In leg. For
/// Abelian systems the charge-weighting operator replaces the generators.
double invariance_residual(const DenseTensorD& t, const std::vector<RepSpace>& spaces,
                           const std::vector<Direction>& directions,
                           Charge root = 0, const ChargeSystemPtr& system = nullptr);

/// Residual of a SymTensor via its dense realization.
double invariance_residual(const SymTensor& t);

/// Fill every allowed path block with unit Gaussians.
SymTensor random_invariant(const std::vector<RepSpace>& declared_spaces,
                           const std::vector<Direction>& directions,
                           const FusionTree& tree, Charge root, std::mt19937_64& rng);

/// Random real invariant matrix as blocks over a space (Schur form).
DenseTensorD random_invariant_operator_dense(const RepSpace& space, std::mt19937_64& rng);

/// The unitary that maps the product basis of A (x) B to the coupled basis of
/// fuse_spaces(A,B).product: rows over the coupled basis, columns over the
/// row-major product basis. Dense comparisons of symmetric reshapes use this.
Eigen::MatrixXd fuse_isometry(const RepSpace& a, const RepSpace& b);

/// Install (or clear, when max_dense_entries == 0) an op-audit hook that
/// checks the invariance residual of every SymTensor an operation returns;
/// tensors whose dense realization exceeds the entry budget are skipped.
void install_invariance_audit(long max_dense_entries, double* max_residual_out,
                              long* checked_out);

}  // namespace symtensor
