#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <functional>
#include <thread>
#include <vector>

namespace carnot {

/// Number of worker threads to use for `requested` (0 = hardware concurrency).
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(chunk) for chunk = 0..chunks-1 on up to `threads` workers.
///
/// Work is handed out dynamically, so callers must write each chunk's result
/// to its own slot and reduce in chunk order afterwards; that keeps results
/// independent of the thread count.
inline void parallel_chunks(std::size_t chunks, int threads, const std::function<void(std::size_t)>& body) {
  const int workers = std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(chunks, 1)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) body(c);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace carnot
