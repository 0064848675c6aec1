#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pipescore {

// jobs: 0 = runtime default, 1 = serial reference path, n = that many threads.
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs <= 0) return omp_get_max_threads();
  return jobs;
#else
  (void)jobs;
  return 1;
#endif
}

// Order-independent parallel map over [0, n). Callers must write results by
// index so output is identical for every thread count.
template <typename F>
void parallel_for(int64_t n, int jobs, F&& fn) {
  const int threads = resolve_jobs(jobs);
  if (threads == 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int64_t i = 0; i < n; ++i) fn(i);
#else
  for (int64_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace pipescore
