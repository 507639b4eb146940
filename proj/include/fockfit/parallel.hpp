#pragma once

#include <cstddef>
#include <functional>

namespace fockfit {

/// Worker count: FOCKFIT_THREADS if set to a positive integer, else hardware concurrency.
std::size_t default_thread_count();

/** Run body(i) for i in [0, n) on up to `threads` workers.
 *
 *  Indices are claimed dynamically; callers write results by index so the
 *  outcome does not depend on scheduling. Calls made from inside a worker run
 *  serially on that worker. The first exception thrown by any body is
 *  rethrown after all workers finish.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = default_thread_count());

} // namespace fockfit
