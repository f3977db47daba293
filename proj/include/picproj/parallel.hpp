#pragma once

#include "picproj/common.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace picproj {

/// Calls body(begin, end, chunk) on contiguous chunks of [0, n) using up to
/// `threads` threads. The first exception thrown by any chunk is rethrown
/// after all chunks finish. Chunk boundaries depend only on n and threads.
template <typename Body>
void parallel_for(Index n, int threads, Body&& body) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
  if (workers == 1) {
    body(Index{0}, n, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index begin = n * w / workers;
    const Index end = n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end, static_cast<int>(w));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace picproj
