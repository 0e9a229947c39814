#pragma once

#include <stdexcept>
#include <string>

namespace fpf {

/// Invalid user-supplied configuration: bad model parameters, malformed
/// config files, unknown keys.  CLI maps this to exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: NaN/Inf intermediates, non-integrable
/// densities, diverged optimizers.  CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// A solver could not produce a usable model (singular Gram matrix beyond
/// the ridge fallback, diffusion-map fixed point not converged, ...).
class fit_error : public std::runtime_error {
 public:
  explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpf
