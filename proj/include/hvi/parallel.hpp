#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace hvi {

/// Worker count: HVI_THREADS if set (>= 1), otherwise hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("HVI_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(chunk, begin, end) over contiguous chunks of [0, n). Chunk k always
/// covers a lower range than chunk k+1, so callers can concatenate per-chunk
/// output in chunk order and get a result independent of the thread count.
inline void parallel_chunks(Eigen::Index n, const std::function<void(int, Eigen::Index, Eigen::Index)>& body,
                            Eigen::Index min_chunk = 2048) {
  const int workers = int(std::clamp<Eigen::Index>(n / std::max<Eigen::Index>(min_chunk, 1), 1, thread_count()));
  if (workers <= 1) {
    body(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&, w, b, e] {
      try {
        body(w, b, e);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int chunk_count(Eigen::Index n, Eigen::Index min_chunk = 2048) {
  return int(std::clamp<Eigen::Index>(n / std::max<Eigen::Index>(min_chunk, 1), 1, thread_count()));
}

}  // namespace hvi
