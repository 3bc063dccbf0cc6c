// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symtensor/models/heisenberg.hpp"

namespace symtensor::models {

/// 3:1 MERA on a periodic chain of 2*3^Q sites: Q layers of one shared
/// disentangler u (2 sites to 2 sites) and one shared isometry w (3 fine
/// sites from 1 coarse site), topped by a tensor t whose open index selects
/// the total-spin sector.
struct MeraConfig {
  int layers = 1;                  // Q
  std::vector<RepSpace> bonds;     // coarse space above each layer, size Q
  Charge top_charge = 0;           // total spin sector, as twice J
  int chi_top = 1;
  int sweeps = 100;
  std::uint64_t seed = 1;
};

struct MeraState {
  RepSpace site;  // bottom space
  MeraConfig cfg;  // bond sectors may have been clipped (see warnings)
  std::vector<SymTensor> u;  // per layer, legs (o1,o2,i1,i2)
  std::vector<SymTensor> w;  // per layer, legs (f1,f2,f3,c)
  SymTensor top;             // legs (s1,s2,a)
  std::vector<std::string> warnings;

  int bottom_sites() const;  // 2 * 3^Q
};

/// Random isometric initialization (blockwise QR); disentanglers start at
/// the identity. Unreachable or oversized bond sectors are clipped with a
/// warning.
MeraState mera_build(const MeraConfig& cfg, const RepSpace& site = blocked_site());

/// sum_a <Psi_a| H |Psi_a> for the Heisenberg ring on the bottom lattice.
double mera_energy(const MeraState& state, const SymTensor& gate);

/// Ascend a two-site gate through one layer (sum of the three cone
/// positions) and descend a two-site density (their average).
SymTensor mera_ascend(const SymTensor& h, const SymTensor& u, const SymTensor& w);
SymTensor mera_descend(const SymTensor& rho, const SymTensor& u, const SymTensor& w);

/// Bond-averaged two-site density on the lattice above layer q (1-based; q =
/// layers gives the top pair).
SymTensor mera_density(const MeraState& state, int q);

struct MeraTrace {
  std::vector<double> energies;  // energy after each sweep (index 0 = initial)
  int rejected_updates = 0;      // guarded updates that would have raised E
  double max_monotonicity_violation = 0.0;
};

/// Linearized-environment optimization with polar updates; every accepted
/// update keeps the energy non-increasing within tolerance.
MeraTrace mera_optimize(MeraState& state, const SymTensor& gate, int sweeps);

/// max over charges of ||M_c^T M_c - I|| for the isometric map formed by
/// fusing the first out_legs legs against the rest.
double isometry_residual(const SymTensor& x, int out_legs);

/// Dense state vectors (one column per top-index basis state); Q = 1 oracle.
Eigen::MatrixXd mera_dense_states(const MeraState& state);

}  // namespace symtensor::models
