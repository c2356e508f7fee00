#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cannings {

inline int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(rep) for rep in [0, reps), statically chunked over `workers`
// threads. Each replicate must derive its own RNG stream from its index and
// write only to index-addressed storage, so results are identical for every
// worker count.
inline void replicate_map(std::int64_t reps, int workers,
                          const std::function<void(std::int64_t)>& fn) {
  if (workers <= 1 || reps <= 1) {
    for (std::int64_t r = 0; r < reps; ++r) fn(r);
    return;
  }
  const int used = static_cast<int>(
      std::min<std::int64_t>(workers, reps));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(used));
  pool.reserve(static_cast<std::size_t>(used));
  for (int w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      const std::int64_t lo = reps * w / used;
      const std::int64_t hi = reps * (w + 1) / used;
      try {
        for (std::int64_t r = lo; r < hi; ++r) fn(r);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cannings
