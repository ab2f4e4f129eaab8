#pragma once

#include <cstddef>
#include <functional>

namespace qrlab {

// Worker count: QRLAB_THREADS if set and positive, else hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = thread_count()).
// Work is split into fixed contiguous blocks, so results written to slot i do
// not depend on the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace qrlab
