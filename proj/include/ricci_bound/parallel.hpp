#pragma once

#include <cstddef>
#include <functional>

namespace ricci {

/// Worker count: hardware concurrency, capped by RICCI_BOUND_THREADS if set.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; callers write results to per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ricci
