#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace ehdg {

/// Number of workers used by the element and face loops.
int worker_count();
/// Sets the worker count; values < 1 select the hardware default.
void set_worker_count(int workers);

/// Runs body(i) for i in [0, n) across the configured workers.
///
/// Iterations must be independent. The first exception thrown by any
/// iteration is rethrown on the calling thread after the loop finishes.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ehdg
