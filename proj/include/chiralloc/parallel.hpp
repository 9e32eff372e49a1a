#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace chiralloc {

// Environment variable consulted when no explicit worker count is given.
inline constexpr const char* kWorkersEnv = "CHIRALLOC_WORKERS";

// requested > 0 wins; otherwise CHIRALLOC_WORKERS; otherwise the hardware
// concurrency (at least 1).
inline unsigned resolve_workers(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [begin, end) on up to `workers` threads. Work items are
// claimed dynamically, so fn must write only to slot i. If any call throws,
// the exception of the lowest failing index is rethrown together with that
// index through on_error(index, exception_ptr).
template <class Fn, class OnError>
void parallel_for(std::size_t begin, std::size_t end, unsigned workers, Fn&& fn,
                  OnError&& on_error) {
  if (begin >= end) return;
  std::atomic<std::size_t> next{begin};
  std::mutex mutex;
  std::size_t failed_index = end;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= end) return;
      {
        std::lock_guard lock(mutex);
        if (failure && i > failed_index) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const auto count = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1u, workers), end - begin));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) on_error(failed_index, failure);
}

}  // namespace chiralloc
