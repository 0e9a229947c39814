#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fpf {

/// Number of OpenMP threads available to this process.
int hardware_workers();

/// Execution policy for the data-parallel kernels.  Every kernel with a
/// reduction has a serial reference implementation; the OpenMP path splits
/// the index range into per-worker blocks and combines the block partials
/// in ascending block order, so results are reproducible for a fixed
/// worker count and bit-identical to the reference when workers == 1.
struct Exec {
  int workers = 0;  // 0 = all available cores, 1 = serial reference path

  int resolved() const;
  bool serial() const { return resolved() <= 1; }
};

/// Splits [0, n) into at most `blocks` contiguous [begin, end) ranges.
std::vector<std::pair<std::int64_t, std::int64_t>> index_blocks(std::int64_t n,
                                                                int blocks);

/// Deterministic per-purpose seed derivation (splitmix64 of seed ^ stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace fpf
