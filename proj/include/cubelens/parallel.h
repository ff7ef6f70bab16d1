#ifndef CUBELENS_PARALLEL_H_
#define CUBELENS_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace cubelens {

// Worker count: CUBELENS_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t ThreadBudget();

// Calls fn(i) for i in [0, n) on up to ThreadBudget() threads. Each index runs
// exactly once; the first exception thrown is rethrown after all workers stop.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cubelens

#endif  // CUBELENS_PARALLEL_H_
