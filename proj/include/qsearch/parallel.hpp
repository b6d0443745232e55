#pragma once

#include <cstddef>
#include <functional>

namespace qsearch {

/// Resolves a worker count: `requested` if positive, otherwise the
/// QSEARCH_THREADS environment variable, otherwise the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls `body(i)` for every i in [0, count) on up to `threads` workers.
/// Work items are claimed dynamically; callers write results into slots
/// indexed by i and reduce in index order afterwards.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace qsearch
