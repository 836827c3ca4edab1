#pragma once

#include <functional>

namespace ppfit {

// Process-wide worker count; 0 means "use hardware concurrency".
void set_thread_count(int n);
int thread_count();

// Runs f(i) for i in [0, n) on up to thread_count() workers with a static
// partition. Every f(i) writes only to its own slot, so results are
// independent of the worker count. The first exception thrown by a worker
// is rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace ppfit
