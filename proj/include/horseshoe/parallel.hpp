#pragma once

#include <cstddef>
#include <functional>

namespace hs {

// Worker count: HORSESHOE_THREADS if set, else hardware concurrency.
int worker_count();

// Override for tests; 0 restores the environment-driven default.
void set_worker_count(int n);

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write into pre-sized slots so the result does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hs
