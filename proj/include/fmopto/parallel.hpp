#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fmopto {

/// Runs body(i) for i in [0, n) on up to `workers` threads pulling indices
/// from a shared counter. Results must be written by index; the first
/// exception thrown by any body is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fmopto
