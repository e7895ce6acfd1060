#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ktraffic {

/// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end)
/// on each, the first chunk on the calling thread. Rethrows the first
/// exception raised by any chunk.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (chunks == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  auto run_chunk = [&](std::size_t c) {
    try {
      fn(n * c / chunks, n * (c + 1) / chunks);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) threads.emplace_back(run_chunk, c);
    run_chunk(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Runs fn(k) for every k in [0, n) with up to `workers` threads pulling
/// indices from a shared counter. Callers write results by index, so the
/// outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  parallel_chunks(std::min<std::size_t>(n, std::max(workers, 1u)), workers,
                  [&](std::size_t, std::size_t) {
                    for (std::size_t k = next++; k < n; k = next++) fn(k);
                  });
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace ktraffic
