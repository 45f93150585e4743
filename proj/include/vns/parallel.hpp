#pragma once

#include <cstddef>
#include <functional>

namespace vns {

// Worker cap from VNS_THREADS (0 or unset = hardware concurrency).
unsigned WorkerCount();

// Runs fn(i) for i in [0, n) across contiguous blocks. Each index is visited
// exactly once; callers write only to slot i, so results do not depend on the
// worker count.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace vns
