#pragma once
// Index-based work stealing.  Workers pull indices from an atomic counter and
// write into per-index slots owned by the caller, so results are a function
// of the index alone and never of the schedule or worker count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace boundarylab::util {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.  Exceptions are
/// captured per index and the lowest-index one is rethrown after the join, so
/// error reporting is deterministic too.
template <typename Fn>
void parallel_for_index(int count, int threads, Fn&& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace boundarylab::util
