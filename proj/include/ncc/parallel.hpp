#ifndef NCC_PARALLEL_HPP_
#define NCC_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ncc {

// Runs fn(i) for i in [0, n) on up to `workers` threads, each owning one
// contiguous chunk. Callers write results into per-index slots and merge them
// in index order afterwards, so output never depends on the worker count.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, n);
  const std::size_t step = (n + chunks - 1) / chunks;
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      pool.emplace_back([&, c] {
        try {
          const std::size_t end = std::min(n, (c + 1) * step);
          for (std::size_t i = c * step; i < end; ++i) fn(i);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ncc

#endif  // NCC_PARALLEL_HPP_
