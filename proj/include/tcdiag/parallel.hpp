#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tcdiag {

// Global cap on worker threads (the CLI's --threads flag). 0 means "use the
// machine's parallelism".
void set_thread_cap(int cap);
int thread_cap();

// Runs f(i) for i in [0, count). Work items must be independent and write
// results keyed by their own index, so the output does not depend on the
// number of workers. The first exception thrown by any item is rethrown.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& f);

}  // namespace tcdiag
