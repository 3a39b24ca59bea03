#pragma once

#include <cstddef>
#include <functional>

namespace shiftshare {

// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
// claimed from a shared counter; each item must write only its own output
// slot, which keeps results independent of the thread count. The first
// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

// threads <= 0 means hardware concurrency.
int resolve_threads(int threads);

}  // namespace shiftshare
