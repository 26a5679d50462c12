#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef EVERROD_OPENMP
#include <omp.h>
#endif

namespace everrod {

// Serial execution is the reference path; parallel results must match it
// bit for bit because every task writes only its own slot.
enum class Execution { serial, parallel };

// Runs body(i) for i in [0, count). The exception of the lowest failing
// index is rethrown, whatever the schedule.
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const long n = static_cast<long>(count);
#ifdef EVERROD_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline int worker_count() {
#ifdef EVERROD_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int jobs) {
#ifdef EVERROD_OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

}  // namespace everrod
