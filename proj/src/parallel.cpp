#include "nne/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nne {

namespace {

std::atomic<std::size_t> g_threads{0};
thread_local bool t_inside_worker = false;

}  // namespace

std::size_t thread_count() {
  const std::size_t n = g_threads.load();
  if (n > 0) return n;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_count(std::size_t n) { g_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads) {
  if (threads == 0) threads = thread_count();
  threads = std::min(threads, n);
  if (threads <= 1 || t_inside_worker) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;

  auto worker = [&]() {
    t_inside_worker = true;
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) break;
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (k < error_index) {
          error_index = k;
          error = std::current_exception();
        }
      }
    }
    t_inside_worker = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nne
