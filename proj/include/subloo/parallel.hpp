#pragma once

#include <cstdint>
#include <functional>

namespace subloo {

// Runs body(i) for i in [0, count) across at most `threads` workers using a
// static contiguous partition. Each index is computed wholly inside one
// worker and results must be written to per-index slots, which makes the
// outcome independent of the thread count. Exceptions are rethrown in the
// calling thread.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body);

}  // namespace subloo
