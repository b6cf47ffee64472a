#pragma once

/*
 * Minimal data-parallel loop.  The worker count defaults to the hardware
 * concurrency and can be capped with the GTL_THREADS environment variable.
 * Work is split into contiguous index blocks; callers must make fn(i) write
 * only to slot i of preallocated storage, which keeps every result identical
 * to the serial order regardless of the thread count.
 */

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gtl {

inline unsigned thread_budget() {
  if (const char* env = std::getenv("GTL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = count * t / workers;
      const std::size_t hi = count * (t + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gtl
