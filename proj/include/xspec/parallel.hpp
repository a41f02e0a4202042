#pragma once

#include <cstddef>
#include <functional>

namespace xspec {

// Worker cap: XSPEC_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for every i in [0, n). Callers write results into per-index
// slots and reduce them afterwards in index order, which keeps every result
// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t max_workers = 0);

}  // namespace xspec
