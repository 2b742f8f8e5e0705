#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace pseudohyp {

/// Worker count, capped by PSEUDOHYP_THREADS when set.
inline int thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("PSEUDOHYP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

/// Static block partition of [0, n); each index is visited exactly once.
template <class F>
void parallel_for(int n, F&& f) {
  const int t = std::min(thread_count(), std::max(1, n / 64));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int k = 0; k < t; ++k) {
    const int lo = static_cast<int>(static_cast<long long>(n) * k / t);
    const int hi = static_cast<int>(static_cast<long long>(n) * (k + 1) / t);
    pool.emplace_back([lo, hi, &f] {
      for (int i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pseudohyp
