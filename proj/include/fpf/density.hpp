#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fpf/quadrature.hpp"

namespace fpf {

struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;
};

struct Mixture1D {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

/// Product density: a symmetric bimodal first coordinate
/// (1/2 N(-1, bimodal_variance) + 1/2 N(+1, bimodal_variance)) times
/// independent N(0, gauss_variance) factors for the remaining coordinates.
struct ProductBimodalGauss {
  int dim = 1;
  double bimodal_variance = 0.2;
  double gauss_variance = 0.2;
};

struct Ensemble;

/// Analytic probability model with exact pdf, seeded sampling, and the
/// support window the quadrature oracles integrate over.
class DensityModel {
 public:
  using Variant = std::variant<Gaussian1D, Mixture1D, ProductBimodalGauss>;

  explicit DensityModel(Variant v);  // throws config_error on bad parameters

  static DensityModel gaussian(double mean, double variance);
  static DensityModel mixture(std::vector<double> weights,
                              std::vector<double> means,
                              std::vector<double> variances);
  /// 1/2 N(-1, variance) + 1/2 N(+1, variance).
  static DensityModel bimodal(double variance);
  static DensityModel product_bimodal_gauss(int dim, double bimodal_variance,
                                            double gauss_variance);

  int dim() const;
  double pdf(const Eigen::VectorXd& x) const;
  double pdf1(double x) const;  // requires dim() == 1

  /// Quadrature window for 1D models:
  /// [min component mean - 8 max sigma, max component mean + 8 max sigma].
  double support_lo() const;
  double support_hi() const;

  /// 1D distribution of a single coordinate (requires independence across
  /// coordinates, which holds for every variant here).
  DensityModel marginal(int coord) const;

  Ensemble sample(Eigen::Index n, std::uint64_t seed) const;

  std::string describe() const;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

/// N particle positions (rows) with the sampling provenance attached.
struct Ensemble {
  Eigen::MatrixXd positions;  // N x d
  std::uint64_t seed = 0;
  std::string source;

  Eigen::Index size() const { return positions.rows(); }
  Eigen::Index dim() const { return positions.cols(); }
};

/// Scalar observation function h : R^d -> R.
class ObservationFn {
 public:
  static ObservationFn coordinate(int index);  // h(x) = x[index]
  static ObservationFn constant(double value);
  static ObservationFn quadratic_well();  // h(x) = (|x| - 2)^2
  /// h(x) + c; the centered objectives are invariant to it.
  static ObservationFn shifted(const ObservationFn& h, double c);

  double operator()(const Eigen::VectorXd& x) const;
  double operator()(double x) const;  // 1D convenience

  /// h over every ensemble row.
  Eigen::VectorXd values(const Ensemble& e) const;

  bool is_constant() const;
  int coordinate_index() const;  // -1 unless a Coordinate variant
  std::string describe() const;

 private:
  struct Coordinate { int index; };
  struct Constant { double value; };
  struct QuadraticWell {};
  using Variant = std::variant<Coordinate, Constant, QuadraticWell>;
  explicit ObservationFn(Variant v) : v_(std::move(v)) {}
  Variant v_;
  double offset_ = 0.0;
};

// --------------------------------------------------------------------------
// Quadrature oracles
// --------------------------------------------------------------------------

/// Exact 1D gain K(x) = -(1/rho(x)) \int_{-inf}^x rho(z) (h(z) - h_hat) dz
/// evaluated with adaptive quadrature over the support window; rho(x) is
/// floored at 1e-300.  Throws std::domain_error for x outside the window.
double exact_gain_1d(const DensityModel& model, const ObservationFn& h, double x);

/// The same gain tabulated in one cumulative-trapezoid pass over a uniform
/// grid (kFixtureGridPoints by default), then evaluated by linear
/// interpolation.  Accepts an unnormalized density: the normalizer cancels
/// in both h_hat and K.
class TabulatedGain1D {
 public:
  TabulatedGain1D(const ScalarFn& density, double lo, double hi,
                  const ScalarFn& h, std::size_t points = kFixtureGridPoints);

  static TabulatedGain1D for_model(const DensityModel& model,
                                   const ObservationFn& h,
                                   std::size_t points = kFixtureGridPoints);

  double operator()(double x) const;  // domain_error outside [lo, hi]
  /// Potential phi with phi(lo) = 0 (cumulative integral of the gain).
  double potential(double x) const;
  double h_hat() const { return h_hat_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_, step_, h_hat_;
  std::vector<double> gain_;
  std::vector<double> potential_;
};

/// Homotopy density rho(t, x) = rho0(x) e^{-t h(x)} / Z(t) for a 1D prior;
/// the normalizer is computed once per instance by adaptive quadrature.
class HomotopyDensity {
 public:
  HomotopyDensity(DensityModel prior, ObservationFn h, double t);

  double pdf(double x) const;
  double unnormalized(double x) const;
  double normalizer() const { return z_; }
  double time() const { return t_; }
  double lo() const;
  double hi() const;
  const DensityModel& prior() const { return prior_; }
  const ObservationFn& observation() const { return h_; }

 private:
  DensityModel prior_;
  ObservationFn h_;
  double t_;
  double z_;
};

/// Convenience wrapper matching the one-shot oracle signature; constructs
/// the cached normalizer internally, so prefer HomotopyDensity in loops.
double homotopy_density(const DensityModel& prior, const ObservationFn& h,
                        double t, double x);

/// \int psi(x) rho(x) dx over [lo, hi] by adaptive quadrature, with rho
/// allowed to be unnormalized (the mass computed on the same grid divides
/// the result).  Tolerance 1e-6 relative.
double expectation(const ScalarFn& density, double lo, double hi,
                   const ScalarFn& psi);
double expectation(const DensityModel& model, const ScalarFn& psi);
double expectation(const HomotopyDensity& density, const ScalarFn& psi);

}  // namespace fpf
