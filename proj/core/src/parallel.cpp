#include "ehdg/parallel.hpp"

#include <atomic>

#include <omp.h>

namespace ehdg {
namespace {
std::atomic<int> configured_workers{0};
}

int worker_count() {
  const int w = configured_workers.load();
  return w > 0 ? w : omp_get_num_procs();
}

void set_worker_count(int workers) { configured_workers.store(workers > 0 ? workers : 0); }

}  // namespace ehdg
