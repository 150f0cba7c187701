#pragma once

// OpenMP is optional; without it the parallel kernels run their loops
// serially and still produce results identical to the serial references.
#ifdef _OPENMP
#include <omp.h>
#define VSTKIT_PARALLEL_FOR _Pragma("omp parallel for schedule(dynamic)")
#else
#define VSTKIT_PARALLEL_FOR
#endif

namespace vstkit {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace vstkit
