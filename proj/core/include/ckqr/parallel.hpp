#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ckqr {

inline unsigned
default_threads()
{
  return std::max(1U, std::thread::hardware_concurrency());
}

//! Calls fn(i) for i in [0, count) on up to `threads` workers. Work items are
//! claimed dynamically; callers write results into slot i so the outcome is
//! independent of scheduling. The first exception thrown is rethrown.
template<class Fn>
void
parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) {
            return;
          }
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) {
              first_error = std::current_exception();
            }
            next.store(count);
            return;
          }
        }
      });
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

} // namespace ckqr
