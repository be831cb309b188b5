#pragma once

#include <cstddef>

namespace aed {

// Worker count for the batched kernels. 0 = library default (all cores).
// Every parallel loop in this project writes disjoint output slices, so the
// result is bitwise identical for any thread count; the setting only affects
// speed. The CLI exposes it as --threads.
void set_num_threads(int n);
int num_threads();

namespace detail {

// Runs fn(i) for i in [0, n). Each index must touch disjoint state.
template <class F>
void parallel_for(std::size_t n, F&& fn);

}  // namespace detail
}  // namespace aed

#ifdef _OPENMP
#include <omp.h>

template <class F>
void aed::detail::parallel_for(std::size_t n, F&& fn) {
  const int threads = aed::num_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<std::size_t>(i));
}

#else

template <class F>
void aed::detail::parallel_for(std::size_t n, F&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

#endif
