// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace symtensor {

/// Worker cap for per-charge parallel sections (1 = serial). Thread-safe.
void set_max_workers(int n);
int max_workers();

/// Run fn(i) for i in [0, n); per-charge block work uses this. Outputs of
/// one operation are never observed partially by another.
void parallel_for(long n, const std::function<void(long)>& fn);

}  // namespace symtensor
