#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sacfem {

/// Runs body(index, worker) for index in [0, count) on `workers` threads.
/// Results must be written by index; if bodies throw, the exception of the
/// smallest failing index is rethrown, so the outcome never depends on
/// scheduling.
template <class Body> void parallel_for(int count, int workers, Body &&body) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  auto run = [&](int worker) {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i, worker);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run, w);
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace sacfem
