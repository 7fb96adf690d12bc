#pragma once

#include <functional>

namespace jpegrad {

/// Worker cap: JPEGRAD_THREADS when set (>=1), else hardware concurrency.
int max_threads();

/// Runs fn(0..n-1) across up to max_threads() workers. Tasks must write to
/// disjoint state; the schedule carries no reductions, so results never
/// depend on thread count. Exceptions from tasks are rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace jpegrad
