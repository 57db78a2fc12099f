#include "cqg/numerics/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cqg::num {

int thread_limit() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("CQG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v < 1024) hw = std::min(hw, int(v));
  }
  return hw;
}

void parallel_blocks(std::int64_t count,
                     const std::function<void(std::int64_t)>& body,
                     int workers) {
  if (count <= 0) return;
  int t = workers > 0 ? workers : thread_limit();
  t = int(std::min<std::int64_t>(t, count));
  if (t <= 1) {
    for (std::int64_t b = 0; b < count; ++b) body(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto run = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= count || failed.load(std::memory_order_relaxed)) return;
      try {
        body(b);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  for (int i = 0; i + 1 < t; ++i) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failed.load() && first_error) std::rethrow_exception(first_error);
}

}  // namespace cqg::num
