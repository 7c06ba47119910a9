#pragma once

#include <cstddef>
#include <functional>

namespace tsr {

// Worker cap from TS_REFINE_THREADS (0 or unset = hardware concurrency).
int effective_thread_count();

// Runs fn(i) for i in [0, count) across worker threads. Call sites must write
// to disjoint outputs; results are then independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace tsr
