#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace unravel {

/// Worker count: UNRAVEL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks must be
/// independent; the first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task,
                  std::size_t workers = worker_count());

/// parallel_for that collects results in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f, std::size_t workers = worker_count()) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); }, workers);
  return out;
}

}  // namespace unravel
