#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace heisgeo {

/// Worker count: HEISGEO_THREADS if set and positive, otherwise the hardware concurrency.
inline unsigned thread_count()
{
  if (const char * env = std::getenv("HEISGEO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * @brief out[i] = f(i) for i < count, evaluated on up to thread_count() threads
 *
 * Output order is independent of scheduling. If any call throws, the exception
 * of the lowest failing index is rethrown.
 */
template <class F>
auto parallel_map(std::size_t count, F && f) -> std::vector<std::invoke_result_t<F &, std::size_t>>
{
  using R = std::invoke_result_t<F &, std::size_t>;
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto & th : pool) th.join();
  }
  for (const auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace heisgeo
