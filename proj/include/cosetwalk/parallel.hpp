#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace cosetwalk {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are
// independent; callers write results into per-index slots and reduce them in
// index order, so output never depends on the thread count. If several items
// throw, the exception of the lowest index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, std::numeric_limits<std::size_t>::max());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          if (i < error_index[w]) {
            error_index[w] = i;
            errors[w] = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w] && (best == workers || error_index[w] < error_index[best])) best = w;
  }
  if (best != workers) std::rethrow_exception(errors[best]);
}

}  // namespace cosetwalk
