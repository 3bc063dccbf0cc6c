// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace symtensor::verify {

struct PropertyResult {
  std::string name;
  long instances = 0;
  double max_residual = 0.0;
  double limit = 0.0;
  bool pass = true;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;
  bool pass() const;
};

/// Kernel identities: CG orthogonality and swap symmetry, closed-form F
/// against the CG-contraction oracle, generator algebra.
SuiteReport verify_kernels();
/// Tensor engine: recoupling unitarity, permutation decomposition
/// independence, dense-oracle commuting squares, compression counts.
SuiteReport verify_tensors();
/// Block linear algebra against the dense oracle; flop-counter identities.
SuiteReport verify_linalg();
/// Heisenberg gate spectra, blocked versus dense exact diagonalization, a
/// short MERA run with its invariants.
SuiteReport verify_models();

std::vector<SuiteReport> verify_all();

}  // namespace symtensor::verify
