#include "rgbps/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rgbps {

namespace {

int default_threads() {
  if (const char* env = std::getenv("RGBPS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::atomic<int>& threads() {
  static std::atomic<int> value{default_threads()};
  return value;
}

}  // namespace

int thread_count() { return threads().load(); }

void set_thread_count(int n) { threads().store(n > 0 ? n : default_threads()); }

}  // namespace rgbps
