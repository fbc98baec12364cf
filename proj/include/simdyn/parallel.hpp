// Minimal fork-join helper. Work is split into fixed index ranges and every
// task writes only to its own output slots, so results never depend on the
// number of threads.
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace simdyn {

class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads = 1) : threads_(std::max(1u, threads)) {}

  unsigned threads() const noexcept { return threads_; }

  // Calls fn(i) for every i in [0, count).
  template <class Fn>
  void for_each_index(std::size_t count, Fn&& fn) const {
    if (threads_ == 1 || count < 2) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    const std::size_t workers = std::min<std::size_t>(threads_, count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t begin = count * t / workers;
        const std::size_t end = count * (t + 1) / workers;
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

 private:
  unsigned threads_;
};

}  // namespace simdyn
