#include "qsense/util.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace qsense {

namespace {

double pairwise_sum_range(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(data, half) +
         pairwise_sum_range(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_range(values.data(), values.size());
}

double pairwise_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  std::size_t nw = threads > 0 ? static_cast<std::size_t>(threads)
                               : std::thread::hardware_concurrency();
  if (nw == 0) nw = 1;
  nw = std::min(nw, n);
  if (nw == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (std::size_t w = 0; w + 1 < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace qsense
