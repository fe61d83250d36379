#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace screenlab {

enum class Execution { serial, parallel };

// Counter-based seed derivation (splitmix64 finalizer).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Evaluates fn(i) for i in [0, n) and returns results in index order; the
// first exception (by index) is rethrown after the loop.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, Execution exec) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errs(n);
  const long long count = static_cast<long long>(n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        out[i] = fn(static_cast<std::size_t>(i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < count; ++i) {
      try {
        out[i] = fn(static_cast<std::size_t>(i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

// Caps the OpenMP team size; returns the value in effect.
int set_thread_cap(int threads);

}  // namespace screenlab
