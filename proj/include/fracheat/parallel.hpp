#pragma once

// Minimal deterministic parallel loop.  Work items are independent and write
// to their own slots, so results never depend on the number of workers.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fracheat {

/// Number of workers: FRACHEAT_WORKERS if set and positive, else the hardware concurrency.
int worker_count();

/// Calls f(i) for i in [0, n) on worker_count() threads.  If any call throws,
/// the exception of the smallest failing index is rethrown after all workers join.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w)
    if (errors[w] && (best == workers || error_index[w] < error_index[best])) best = w;
  if (best != workers) std::rethrow_exception(errors[best]);
}

}  // namespace fracheat
