#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fpf {

using ScalarFn = std::function<double(double)>;

/// Composite trapezoid rule with n uniformly spaced points (n >= 2).
double trapezoid(const ScalarFn& f, double lo, double hi, std::size_t n);

/// Trapezoid rule with interval halving: doubles the point count until the
/// relative change of the estimate drops below rel_tol.  Reuses previous
/// function evaluations, so the cost is that of the finest grid.
double adaptive_trapezoid(const ScalarFn& f, double lo, double hi,
                          double rel_tol = 1e-8, std::size_t n0 = 1025,
                          std::size_t n_max = (std::size_t{1} << 22) + 1);

/// Grid point count used for frozen reference tabulations.
inline constexpr std::size_t kFixtureGridPoints = 100001;

/// Uniform grid with cached function values and the cumulative trapezoid
/// integral; the workhorse behind the 1D gain oracle and analytic CDFs.
class CumulativeGrid {
 public:
  CumulativeGrid(const ScalarFn& f, double lo, double hi, std::size_t n);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return values_.size(); }
  double step() const { return step_; }
  double value_at(std::size_t i) const { return values_[i]; }
  double x_at(std::size_t i) const { return lo_ + step_ * static_cast<double>(i); }

  /// \int_lo^x f, linearly interpolated between grid nodes.
  double integral_to(double x) const;
  /// \int_lo^hi f.
  double total() const { return cumulative_.back(); }

 private:
  double lo_, hi_, step_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

/// Normalized CDF of a (possibly unnormalized) density tabulated on a grid.
class AnalyticCdf1D {
 public:
  AnalyticCdf1D(const ScalarFn& pdf, double lo, double hi,
                std::size_t n = kFixtureGridPoints);

  /// F(x), clamped to [0, 1] outside the tabulation window.
  double operator()(double x) const;

 private:
  CumulativeGrid grid_;
  double mass_;
};

}  // namespace fpf
