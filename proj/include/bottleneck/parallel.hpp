#pragma once

#include <cstddef>
#include <functional>

namespace bottleneck {

// Worker count: BOTTLENECK_LAB_THREADS when set to a positive integer, else
// the hardware concurrency (at least 1).
std::size_t thread_count();

// Calls body(i) for i in [0, n) on up to `threads` workers, each taking a
// contiguous block of indices. The first exception thrown by any call is
// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = thread_count());

}  // namespace bottleneck
