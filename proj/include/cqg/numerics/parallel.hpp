#pragma once

#include <cstdint>
#include <functional>

namespace cqg::num {

// Worker cap: min(hardware_concurrency, CQG_THREADS if set). Always >= 1.
int thread_limit();

// Runs body(b) for b in [0, count) on up to `workers` threads (0 = auto).
// Blocks are claimed from an atomic counter; the caller is responsible for
// writing results into per-block slots so that the combination step is
// independent of which thread ran which block.
void parallel_blocks(std::int64_t count,
                     const std::function<void(std::int64_t)>& body,
                     int workers = 0);

}  // namespace cqg::num
