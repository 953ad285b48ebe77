#pragma once

#include <cstddef>
#include <functional>

namespace epr {

/// Worker count used by the per-row loops. 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls body(i) for every i in [0, n). Iterations must write disjoint outputs;
/// results are then independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace epr
