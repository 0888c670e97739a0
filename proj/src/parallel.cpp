#include "infoplan/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#ifdef INFOPLAN_HAVE_OPENMP
#include <omp.h>
#endif

namespace infoplan {

namespace {
std::atomic<int> g_max_threads{0};
}

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void set_max_threads(int threads) { g_max_threads.store(threads > 0 ? threads : 0); }

int max_threads() {
  const int t = g_max_threads.load();
  return t > 0 ? t : hardware_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int threads = max_threads();
#ifdef INFOPLAN_HAVE_OPENMP
  if (threads > 1 && n > 1) {
    // Exceptions may not unwind out of the parallel region; park them per
    // index and rethrow the lowest one so failures match the serial path.
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return;
  }
#endif
  (void)threads;
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace infoplan
