#pragma once

#include <cstddef>
#include <functional>

namespace storeval {

/// Global worker-count knob. 0 selects the hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Applies fn(begin, end) over fixed-size chunks of [0, n). Chunk boundaries
/// depend only on `chunk`, so per-chunk results are identical for any number
/// of workers; callers own any cross-chunk reduction.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace storeval
