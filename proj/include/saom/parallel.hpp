#ifndef SAOM_PARALLEL_HPP
#define SAOM_PARALLEL_HPP

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace saom {

// Runs body(0) .. body(n-1) on up to `threads` workers. Each index owns
// its output slots, so results do not depend on the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace saom

#endif
