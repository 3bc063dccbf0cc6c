// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "symtensor/models/heisenberg.hpp"

namespace symtensor::models {

struct EdOptions {
  int num_sites = 2;
  bool periodic = true;
  RepSpace site;                        // defaults to the spin-1/2 site
  std::optional<std::vector<Charge>> sectors;  // absent: all reachable sectors
  long dense_limit = 1 << 14;           // dense-path guard on the product dimension
};

struct SectorSpectrum {
  Charge sector;       // total spin as twice_j
  Eigen::VectorXd energies;  // ascending, one entry per multiplet
};

struct EdResult {
  std::vector<SectorSpectrum> sectors;
  /// All energies with each sector entry repeated dim(sector) times, sorted.
  std::vector<double> flattened() const;
  double ground_energy() const;
  Charge ground_sector() const;
};

/// SU(2)-blocked exact diagonalization of the Heisenberg chain: the
/// Hamiltonian is assembled in the coupled basis by iterated fusion, with
/// every basis change mediated by Gamma recouplings, and diagonalized one
/// total-spin sector at a time.
EdResult exact_diag_blocked(const EdOptions& opts);

/// Plain dense cross-check (full spectrum of the 2^|lattice| matrix).
Eigen::VectorXd exact_diag_dense(const EdOptions& opts);

/// Dense Hamiltonian of the chain (oracle use).
Eigen::MatrixXd dense_hamiltonian(const EdOptions& opts);

}  // namespace symtensor::models
