#pragma once

#include <cstddef>
#include <functional>

namespace staug {

// Thread count from the explicit value, else STAUG_THREADS, else 1.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot, so results are independent of scheduling. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace staug
