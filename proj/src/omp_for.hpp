#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace fnarx::detail {

// Runs body(i) for i in [0, n) across OpenMP threads. The first exception
// thrown by any iteration is rethrown on the calling thread after the loop.
template <typename Body>
void omp_for(std::size_t n, Body&& body, bool dynamic = true) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const long count = static_cast<long>(n);
  auto guarded = [&](long i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  if (dynamic) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) guarded(i);
  } else {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) guarded(i);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fnarx::detail
