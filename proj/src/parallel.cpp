#include "cascade_infer/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cascade_infer {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("CASCADE_INFER_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t chunk_count(std::size_t count, std::size_t threads) {
  if (threads == 0) threads = default_thread_count();
  return std::max<std::size_t>(1, std::min(threads, count));
}

void parallel_chunks(std::size_t count, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(count, threads);
  const auto bounds = [&](std::size_t c) { return count * c / chunks; };
  if (chunks == 1) {
    body(0, 0, count);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(chunks - 1);
  const auto run = [&](std::size_t c) {
    try {
      body(c, bounds(c), bounds(c + 1));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  for (std::size_t c = 1; c < chunks; ++c) workers.emplace_back(run, c);
  run(0);
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cascade_infer
