#pragma once

#include <cstddef>
#include <functional>

namespace mvlab {

/// Number of hardware threads (at least 1).
int hardware_threads() noexcept;

/// Runs fn(i) for i in [0, count) on up to `threads` workers.  Callers write
/// results into slot i, so the outcome never depends on scheduling.  The
/// first exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mvlab
