#pragma once

#include <cstdint>
#include <functional>

namespace grasplab {

// Worker cap: GRASPLAB_WORKERS if set (min 1), else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n). Callers store results by index, so output is
// identical for any worker count.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace grasplab
