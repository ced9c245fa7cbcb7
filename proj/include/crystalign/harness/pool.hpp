#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "crystalign/core/error.hpp"

namespace crystalign {

// Runs fn(i) for i in [0, n) on `workers` threads. Items are claimed from a
// shared counter, so idle threads pick up whatever remains; callers write
// results into slot i, which keeps output order independent of scheduling.
// fn must not throw; an escaped exception is rethrown after all threads join.
inline void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  if (n == 0) return;
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace crystalign
