#include "fpf/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fpf {

int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int Exec::resolved() const {
  if (workers > 0) return workers;
  return hardware_workers();
}

std::vector<std::pair<std::int64_t, std::int64_t>> index_blocks(std::int64_t n,
                                                                int blocks) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  if (n <= 0 || blocks < 1) return out;
  const std::int64_t b = std::min<std::int64_t>(blocks, n);
  out.reserve(static_cast<std::size_t>(b));
  const std::int64_t base = n / b;
  const std::int64_t rem = n % b;
  std::int64_t begin = 0;
  for (std::int64_t k = 0; k < b; ++k) {
    const std::int64_t len = base + (k < rem ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fpf
