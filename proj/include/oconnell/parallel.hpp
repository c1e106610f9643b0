#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace oconnell {

// Worker count: OCONNELL_THREADS if set and positive, else the hardware
// concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("OCONNELL_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) over contiguous blocks. Each index is handled
// by exactly one worker, so results written per index do not depend on the
// worker count. The first exception is rethrown on the calling thread.
template <class Body>
void parallel_for(long n, Body&& body, unsigned workers = thread_count()) {
  if (n <= 0) return;
  workers = static_cast<unsigned>(std::min<long>(workers, n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    long lo = n * w / workers, hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace oconnell
