#pragma once

#include <cstddef>
#include <functional>

namespace wfr {

/// Worker count: `WFR_THREADS` if set and positive, otherwise the hardware
/// concurrency. Read once per process.
int thread_count();

/// Runs `body(begin, end)` over a fixed partition of [0, n). The partition
/// depends only on n and the thread count, so per-element work is
/// deterministic. Small ranges run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace wfr
