#pragma once

#include <cstddef>
#include <functional>

namespace entroscope {

// Worker count: ENTROSCOPE_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace entroscope
