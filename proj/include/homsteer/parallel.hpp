#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace homsteer {

/// Worker count: HOMSTEER_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
inline int thread_count() {
  if (const char* env = std::getenv("HOMSTEER_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Runs fn(i) for i in [0, n) on up to thread_count() threads, in contiguous
/// chunks. Callers write results into index-owned slots so the outcome does
/// not depend on scheduling. The first exception is rethrown. Nested calls
/// from inside a worker run serially.
template <class F>
void parallel_for(int n, F&& fn, int max_threads = 0) {
  int workers = max_threads > 0 ? max_threads : thread_count();
  workers = std::min(workers, n);
  if (workers <= 1 || detail::in_parallel_region) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      detail::in_parallel_region = true;
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace homsteer
