#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bdef {

// Execution mode for the data-parallel kernels. Serial is the reference
// implementation; OpenMP must produce bit-identical results.
enum class ExecMode { Serial, OpenMP };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace bdef
