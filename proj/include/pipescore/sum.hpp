#pragma once

#include <cstddef>

namespace pipescore {

// Pairwise summation. Order-stable and accurate to ~1e-15 relative, so
// aggregates reproduce regardless of how the per-item values were produced.
template <typename F>
double pairwise_sum(size_t n, F&& value_at, size_t offset = 0) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += value_at(offset + i);
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(half, value_at, offset) + pairwise_sum(n - half, value_at, offset + half);
}

}  // namespace pipescore
