#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace ablab {

/// Runs body(i) for i in [0, n) on up to `threads` workers with a static strided split.
/// Callers write results into per-index slots, so the outcome does not depend on `threads`.
/// If any call throws, the exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  struct Failure {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;
  };
  std::vector<Failure> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          failures[w] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  const auto first = std::min_element(failures.begin(), failures.end(),
                                      [](const Failure& a, const Failure& b) { return a.index < b.index; });
  if (first->error) std::rethrow_exception(first->error);
}

}  // namespace ablab
