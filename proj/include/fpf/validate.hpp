#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fpf {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidateOptions {
  std::uint64_t seed = 0;
  int workers = 0;
  /// Test fixture: negates the double-backprop term of the parameter
  /// gradient before the finite-difference comparison, which must then fail.
  bool mutate_double_backprop = false;
};

/// Fast invariant suite behind the `validate` subcommand: finite-difference
/// gradient checks, the quadratic loss-gap identity, weak-form residuals of
/// a trained network, constant-h zero gain across all solvers, homotopy
/// normalization/proportionality, Markov-matrix row sums and fixed-point
/// residual, and bit-determinism of seeded runs.
std::vector<PropertyResult> run_validation_suite(const ValidateOptions& opts = {});

}  // namespace fpf
