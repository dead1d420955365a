#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace monovi {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> n{0};
  return n;
}
}  // namespace detail

/// Worker count for data-parallel loops. 0 (the default) means: read
/// MONOVI_THREADS from the environment, else run sequentially.
inline void set_thread_count(unsigned n) { detail::thread_setting().store(n); }

inline unsigned thread_count() {
  unsigned n = detail::thread_setting().load();
  if (n == 0) {
    if (const char* env = std::getenv("MONOVI_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<unsigned>(v);
    }
  }
  return std::max(n, 1u);
}

/// Calls fn(i) for i in [0, count). Each index must write to its own slot;
/// results are therefore independent of the worker count. Small loops stay
/// on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t min_parallel = 16384) {
  const unsigned workers = thread_count();
  if (workers <= 1 || count < min_parallel) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace monovi
