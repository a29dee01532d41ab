#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace qsense {

// Sum with a fixed pairwise-tree association order.  The result depends only
// on the contents of the span, never on threading or chunking, so Monte-Carlo
// averages stay reproducible when the per-sample work is parallelized.
double pairwise_sum(std::span<const double> values);

double pairwise_mean(std::span<const double> values);

// Runs body(i) for i in [0, n) on up to `threads` worker threads
// (0 = hardware concurrency).  Bodies must write to disjoint state.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace qsense
