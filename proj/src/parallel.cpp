// SPDX-License-Identifier: Apache-2.0
#include "symtensor/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace symtensor {

namespace {
std::atomic<int> g_max_workers{1};
}

void set_max_workers(int n) { g_max_workers.store(n < 1 ? 1 : n); }
int max_workers() { return g_max_workers.load(); }

void parallel_for(long n, const std::function<void(long)>& fn) {
  const int workers = std::min<long>(g_max_workers.load(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace symtensor
