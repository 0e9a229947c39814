#include "fpf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpf/errors.hpp"

namespace fpf {

double trapezoid(const ScalarFn& f, double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("trapezoid: need at least 2 points");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  double sum = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sum += f(lo + h * static_cast<double>(i));
  }
  return sum * h;
}

double adaptive_trapezoid(const ScalarFn& f, double lo, double hi,
                          double rel_tol, std::size_t n0, std::size_t n_max) {
  std::size_t intervals = std::max<std::size_t>(n0, 2) - 1;
  double h = (hi - lo) / static_cast<double>(intervals);
  double sum = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < intervals; ++i) {
    sum += f(lo + h * static_cast<double>(i));
  }
  double estimate = sum * h;
  while (intervals + 1 < n_max) {
    // refine: midpoints of the current intervals
    double mid_sum = 0.0;
    for (std::size_t i = 0; i < intervals; ++i) {
      mid_sum += f(lo + h * (static_cast<double>(i) + 0.5));
    }
    sum += mid_sum;
    intervals *= 2;
    h *= 0.5;
    const double refined = sum * h;
    const double scale = std::max({std::abs(refined), std::abs(estimate), 1e-300});
    const bool done = std::abs(refined - estimate) <= rel_tol * scale;
    estimate = refined;
    if (done) break;
  }
  if (!std::isfinite(estimate)) {
    throw numeric_error("adaptive_trapezoid: non-finite integral estimate");
  }
  return estimate;
}

CumulativeGrid::CumulativeGrid(const ScalarFn& f, double lo, double hi,
                               std::size_t n)
    : lo_(lo), hi_(hi) {
  if (n < 2) throw std::invalid_argument("CumulativeGrid: need at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("CumulativeGrid: empty interval");
  step_ = (hi - lo) / static_cast<double>(n - 1);
  values_.resize(n);
  cumulative_.resize(n);
  for (std::size_t i = 0; i < n; ++i) values_[i] = f(x_at(i));
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    cumulative_[i] = cumulative_[i - 1] + 0.5 * step_ * (values_[i - 1] + values_[i]);
  }
}

double CumulativeGrid::integral_to(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return cumulative_.back();
  const double pos = (x - lo_) / step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  const double x0 = x_at(i);
  const double dx = x - x0;
  // trapezoid over the partial cell, with f linear inside the cell
  const double f0 = values_[i];
  const double f1 = values_[i + 1];
  const double fx = f0 + (f1 - f0) * (dx / step_);
  return cumulative_[i] + 0.5 * dx * (f0 + fx);
}

AnalyticCdf1D::AnalyticCdf1D(const ScalarFn& pdf, double lo, double hi,
                             std::size_t n)
    : grid_(pdf, lo, hi, n), mass_(grid_.total()) {
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
    throw numeric_error("AnalyticCdf1D: density mass is not positive and finite");
  }
}

double AnalyticCdf1D::operator()(double x) const {
  return std::clamp(grid_.integral_to(x) / mass_, 0.0, 1.0);
}

}  // namespace fpf
