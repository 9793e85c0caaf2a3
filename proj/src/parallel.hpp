#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace modquad::detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(task, worker) for every task in [0, tasks), handing tasks out
/// dynamically. The caller's thread acts as worker 0.
template <class Fn>
void run_tasks(std::uint64_t tasks, unsigned workers, Fn&& fn) {
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), tasks));
  std::atomic<std::uint64_t> next{0};
  auto loop = [&](unsigned worker) {
    for (;;) {
      const std::uint64_t t = next.fetch_add(1);
      if (t >= tasks) return;
      fn(t, worker);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(loop, w);
  loop(0);
  for (auto& th : pool) th.join();
}

}  // namespace modquad::detail
