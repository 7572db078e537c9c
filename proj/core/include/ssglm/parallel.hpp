#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ssglm {

/// Runs body(i) for i in [0, count) on up to `threads` workers.
///
/// Results must be written to per-index slots; this function imposes no
/// ordering between calls. If several calls throw, the exception from the
/// smallest index is rethrown so failures are reported deterministically.
template <class Body>
void parallel_for(std::ptrdiff_t count, int threads, Body&& body) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<std::ptrdiff_t>(std::max(threads, 1), count));
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<std::ptrdiff_t> next{0};
  auto run = [&] {
    for (std::ptrdiff_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ssglm
