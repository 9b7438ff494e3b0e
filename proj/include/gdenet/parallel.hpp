#pragma once

#include <cstddef>
#include <functional>

namespace gdenet {

// Worker count: GDENET_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count). Indices are split into contiguous static
// chunks, so each index is always processed by exactly one call and the result
// of any per-index computation does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gdenet
