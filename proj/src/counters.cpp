// SPDX-License-Identifier: Apache-2.0
#include "symtensor/counters.hpp"

#include <atomic>

namespace symtensor::counters {

namespace {
std::atomic<std::int64_t> g_spin_networks{0};
std::atomic<std::int64_t> g_gamma_builds{0};
std::atomic<std::int64_t> g_gamma_cache_hits{0};
std::atomic<std::int64_t> g_gamma_disk_hits{0};
std::atomic<std::int64_t> g_matmul_flops{0};
std::atomic<std::int64_t> g_svd_flops{0};
std::atomic<std::int64_t> g_coeffs_touched{0};
}  // namespace

Snapshot snapshot() {
  return {g_spin_networks.load(),   g_gamma_builds.load(), g_gamma_cache_hits.load(),
          g_gamma_disk_hits.load(), g_matmul_flops.load(), g_svd_flops.load(),
          g_coeffs_touched.load()};
}

void reset() {
  g_spin_networks = 0;
  g_gamma_builds = 0;
  g_gamma_cache_hits = 0;
  g_gamma_disk_hits = 0;
  g_matmul_flops = 0;
  g_svd_flops = 0;
  g_coeffs_touched = 0;
}

void add_spin_networks(std::int64_t n) { g_spin_networks += n; }
void add_gamma_build() { ++g_gamma_builds; }
void add_gamma_cache_hit() { ++g_gamma_cache_hits; }
void add_gamma_disk_hit() { ++g_gamma_disk_hits; }
void add_matmul_flops(std::int64_t n) { g_matmul_flops += n; }
void add_svd_flops(std::int64_t n) { g_svd_flops += n; }
void add_coeffs_touched(std::int64_t n) { g_coeffs_touched += n; }

}  // namespace symtensor::counters
