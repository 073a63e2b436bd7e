#ifndef GPDISCRIM_PARALLEL_HPP
#define GPDISCRIM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gpdiscrim {

inline unsigned hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Runs fn(i) for i in [0, count) on a small worker pool. Work is handed out
// in fixed-size blocks through an atomic cursor, so results written to
// per-index slots are independent of thread scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t block = 16) {
  if (count == 0) return;
  const unsigned workers =
      std::min<std::size_t>(hardware_threads(), (count + block - 1) / block);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(block);
      if (begin >= count || failed.load(std::memory_order_relaxed)) return;
      const std::size_t end = std::min(begin + block, count);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Deterministic argmax over scores[0..count): largest value wins, ties go to
// the lowest index. Scores are computed in parallel, reduced sequentially.
template <typename ScoreFn>
std::ptrdiff_t parallel_argmax(std::size_t count, ScoreFn&& score,
                               double* best_value = nullptr) {
  std::vector<double> values(count);
  parallel_for(count, [&](std::size_t i) { values[i] = score(i); });
  std::ptrdiff_t best = -1;
  double best_val = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (best < 0 || values[i] > best_val) {
      best = static_cast<std::ptrdiff_t>(i);
      best_val = values[i];
    }
  }
  if (best_value && best >= 0) *best_value = best_val;
  return best;
}

}  // namespace gpdiscrim

#endif
