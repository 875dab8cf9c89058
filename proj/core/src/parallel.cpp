#include "pspin/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "pspin/error.hpp"

namespace pspin {

namespace {

std::atomic<int> g_threads{1};
thread_local bool t_inside_worker = false;

}  // namespace

void set_num_threads(int threads) {
  if (threads < 1) throw InvalidArgument("thread count must be >= 1");
  g_threads.store(threads);
}

int num_threads() { return g_threads.load(); }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(num_threads()),
      (n + std::max<std::size_t>(min_chunk, 1) - 1) /
          std::max<std::size_t>(min_chunk, 1));
  // Nested regions run inline on the calling worker.
  if (workers <= 1 || t_inside_worker) {
    body(0, n);
    return;
  }

  // One slot per chunk; the lowest failing chunk wins so the reported
  // error does not depend on scheduling.
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, w, begin, end] {
        t_inside_worker = true;
        try {
          body(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pspin
