#pragma once

#include <cstddef>
#include <functional>

namespace thermolab {

// Worker count: THERMOLAB_THREADS if set, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n) on the worker pool. Each index is processed exactly
// once; callers write results by index so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace thermolab
