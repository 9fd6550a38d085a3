#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace rgbps {

/// Worker thread count. Initialized from the RGBPS_THREADS environment
/// variable when set, otherwise the OpenMP default.
int thread_count();
void set_thread_count(int threads);

/// Runs fn(begin, end) over [0, n) in chunks of `chunk` items. Chunk
/// boundaries depend only on n and chunk, so any per-chunk computation is
/// identical regardless of how many threads execute it. The first exception
/// thrown by a worker is rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::ptrdiff_t n, std::ptrdiff_t chunk, Fn&& fn) {
  if (n <= 0) return;
  if (chunk < 1) chunk = 1;
  const std::ptrdiff_t chunks = (n + chunk - 1) / chunk;
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    try {
      const std::ptrdiff_t begin = c * chunk;
      const std::ptrdiff_t end = begin + chunk < n ? begin + chunk : n;
      fn(begin, end);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Runs fn(i) for every i in [0, n).
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn) {
  parallel_chunks(n, 1, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace rgbps
