#pragma once

#include <cstddef>
#include <functional>

namespace mvsde {

/// Global cap on worker threads used by parallel_for.  0 means "use
/// hardware concurrency".  Thread count must never change numerical
/// results; it only changes how independent tasks are scheduled.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, n).  Tasks are partitioned into contiguous
/// blocks, one block per worker, each block executed in index order.
/// Every task must write only to its own slots; reductions belong in a
/// sequential pass afterwards, so results are identical for any thread
/// count.  The first exception thrown by a task is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace mvsde
