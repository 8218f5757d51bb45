#pragma once

#include <cstddef>
#include <functional>

namespace vsql {

// Global worker count for parallel_for. 0 restores the hardware default.
void set_thread_count(int n);
int thread_count();

// Run fn(i) for i in [0, n) on contiguous index chunks and join before
// returning. Each index writes only its own output slot, so results are
// identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace vsql
