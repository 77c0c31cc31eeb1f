#ifndef SKEWLINK_PARALLEL_HPP_
#define SKEWLINK_PARALLEL_HPP_

#include <cstdint>

namespace skewlink {

// Number of workers OpenMP would use (1 when built without OpenMP).
int hardware_threads();

// Apply fn(i) for i in [0, n). With threads <= 1 this is a plain loop (the
// serial reference path); otherwise iterations are distributed over an
// OpenMP team. Bodies must only write to slots indexed by i, so results are
// identical for every thread count.
template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn);

}  // namespace skewlink

#ifdef _OPENMP
#include <omp.h>
#endif

namespace skewlink {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
#ifdef _OPENMP
  if (threads > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
#endif
  (void)threads;
  for (std::int64_t i = 0; i < n; ++i) {
    fn(i);
  }
}

}  // namespace skewlink

#endif  // SKEWLINK_PARALLEL_HPP_
