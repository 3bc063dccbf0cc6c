// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "symtensor/block_linalg.hpp"
#include "symtensor/sym_tensor.hpp"

namespace symtensor::models {

/// The antiferromagnetic Heisenberg coupling 4(JxJx + JyJy + JzJz) between
/// two sites, as a rank-4 invariant tensor with legs (out1, out2, in1, in2).
/// For the blocked two-spin site (space j = {0,1}, d = {1,1}) the gate also
/// carries half of each site's internal bond so that summing gates over a
/// ring reproduces the spin chain exactly.
SymTensor heisenberg_gate(const RepSpace& site);

/// The single spin-1/2 site space {(1/2, 1)}.
RepSpace spin_half_site();

/// The blocked two-spin site space {(0,1),(1,1)} of the coarse chain.
RepSpace blocked_site();

/// Dense two-site matrix of the gate (ordered (site1 x site2) x (site1 x site2)).
Eigen::MatrixXd heisenberg_dense_two_site(const RepSpace& site);

/// Gate as a block-diagonal operator on the coupled two-site space.
BlockDiagMatrix heisenberg_coupled_blocks(const RepSpace& site);

}  // namespace symtensor::models
