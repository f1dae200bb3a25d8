#pragma once

#include <cstddef>
#include <functional>

namespace ergoreg {

// Resolves the worker count: explicit request > ERGOREG_THREADS > hardware.
// A request of 0 means "not specified".
unsigned resolve_threads(unsigned requested = 0);

// Runs fn(i) for i in [0, count) across up to `threads` workers.
// Callers must write results into per-index slots; reductions are then
// performed sequentially so outputs do not depend on the schedule.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace ergoreg
