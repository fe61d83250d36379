#include "screenlab/parallel.hpp"

#include <omp.h>

namespace screenlab {

int set_thread_cap(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  return omp_get_max_threads();
}

}  // namespace screenlab
