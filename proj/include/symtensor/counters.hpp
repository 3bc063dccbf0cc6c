// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace symtensor::counters {

/// Deterministic instrumentation counters. Timing is informative only; all
/// cost contracts in tests rest on these.
struct Snapshot {
  std::int64_t spin_networks_evaluated;
  std::int64_t gamma_builds;
  std::int64_t gamma_cache_hits;
  std::int64_t gamma_disk_hits;
  std::int64_t matmul_flops;
  std::int64_t svd_flops;
  std::int64_t coeffs_touched;
};

Snapshot snapshot();
void reset();

void add_spin_networks(std::int64_t n);
void add_gamma_build();
void add_gamma_cache_hit();
void add_gamma_disk_hit();
void add_matmul_flops(std::int64_t n);
void add_svd_flops(std::int64_t n);
void add_coeffs_touched(std::int64_t n);

}  // namespace symtensor::counters
