#include "fpf/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fpf/errors.hpp"
#include "fpf/parallel.hpp"

namespace fpf {

namespace {

constexpr double kDensityFloor = 1e-300;

double gauss_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

void check_variance(double var, const char* what) {
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw config_error(std::string(what) + ": variance must be positive and finite");
  }
}

const Mixture1D bimodal_mixture(double var) {
  return Mixture1D{{0.5, 0.5}, {-1.0, 1.0}, {var, var}};
}

double mixture_pdf(const Mixture1D& m, double x) {
  double p = 0.0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    p += m.weights[k] * gauss_pdf(x, m.means[k], m.variances[k]);
  }
  return p;
}

void mixture_window(const Mixture1D& m, double& lo, double& hi) {
  double mean_lo = m.means.front(), mean_hi = m.means.front(), sig = 0.0;
  for (std::size_t k = 0; k < m.means.size(); ++k) {
    mean_lo = std::min(mean_lo, m.means[k]);
    mean_hi = std::max(mean_hi, m.means[k]);
    sig = std::max(sig, std::sqrt(m.variances[k]));
  }
  lo = mean_lo - 8.0 * sig;
  hi = mean_hi + 8.0 * sig;
}

}  // namespace

DensityModel::DensityModel(Variant v) : v_(std::move(v)) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          check_variance(m.variance, "Gaussian1D");
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          if (m.weights.empty() || m.weights.size() != m.means.size() ||
              m.weights.size() != m.variances.size()) {
            throw config_error("Mixture1D: weights/means/variances must have equal, nonzero length");
          }
          double sum = 0.0;
          for (double w : m.weights) {
            if (!(w >= 0.0)) throw config_error("Mixture1D: weights must be nonnegative");
            sum += w;
          }
          if (std::abs(sum - 1.0) > 1e-12) {
            throw config_error("Mixture1D: weights must sum to 1");
          }
          for (double v2 : m.variances) check_variance(v2, "Mixture1D");
        } else {
          if (m.dim < 1) throw config_error("ProductBimodalGauss: dim must be >= 1");
          check_variance(m.bimodal_variance, "ProductBimodalGauss");
          check_variance(m.gauss_variance, "ProductBimodalGauss");
        }
      },
      v_);
}

DensityModel DensityModel::gaussian(double mean, double variance) {
  return DensityModel(Gaussian1D{mean, variance});
}

DensityModel DensityModel::mixture(std::vector<double> weights,
                                   std::vector<double> means,
                                   std::vector<double> variances) {
  return DensityModel(Mixture1D{std::move(weights), std::move(means), std::move(variances)});
}

DensityModel DensityModel::bimodal(double variance) {
  return DensityModel(bimodal_mixture(variance));
}

DensityModel DensityModel::product_bimodal_gauss(int dim, double bimodal_variance,
                                                 double gauss_variance) {
  return DensityModel(ProductBimodalGauss{dim, bimodal_variance, gauss_variance});
}

int DensityModel::dim() const {
  if (const auto* p = std::get_if<ProductBimodalGauss>(&v_)) return p->dim;
  return 1;
}

double DensityModel::pdf(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("DensityModel::pdf: dimension mismatch");
  }
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return gauss_pdf(x[0], m.mean, m.variance);
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          return mixture_pdf(m, x[0]);
        } else {
          double p = mixture_pdf(bimodal_mixture(m.bimodal_variance), x[0]);
          for (int k = 1; k < m.dim; ++k) {
            p *= gauss_pdf(x[k], 0.0, m.gauss_variance);
          }
          return p;
        }
      },
      v_);
}

double DensityModel::pdf1(double x) const {
  if (dim() != 1) throw std::invalid_argument("DensityModel::pdf1: model is not 1D");
  Eigen::VectorXd v(1);
  v[0] = x;
  return pdf(v);
}

double DensityModel::support_lo() const {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return m.mean - 8.0 * std::sqrt(m.variance);
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          double lo, hi;
          mixture_window(m, lo, hi);
          return lo;
        } else {
          double lo, hi;
          mixture_window(bimodal_mixture(m.bimodal_variance), lo, hi);
          return lo;
        }
      },
      v_);
}

double DensityModel::support_hi() const {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return m.mean + 8.0 * std::sqrt(m.variance);
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          double lo, hi;
          mixture_window(m, lo, hi);
          return hi;
        } else {
          double lo, hi;
          mixture_window(bimodal_mixture(m.bimodal_variance), lo, hi);
          return hi;
        }
      },
      v_);
}

DensityModel DensityModel::marginal(int coord) const {
  if (coord < 0 || coord >= dim()) {
    throw std::invalid_argument("DensityModel::marginal: coordinate out of range");
  }
  if (const auto* p = std::get_if<ProductBimodalGauss>(&v_)) {
    if (coord == 0) return DensityModel(bimodal_mixture(p->bimodal_variance));
    return gaussian(0.0, p->gauss_variance);
  }
  return *this;
}

Ensemble DensityModel::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("DensityModel::sample: n must be >= 1");
  std::mt19937_64 rng(derive_seed(seed, 0x5a3d1e));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const int d = dim();
  Ensemble out;
  out.positions.resize(n, d);
  out.seed = seed;
  out.source = describe();

  auto draw_mixture = [&](const Mixture1D& m) {
    const double u = uniform(rng);
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < m.weights.size(); ++k) {
      acc += m.weights[k];
      if (u < acc) break;
    }
    return m.means[k] + std::sqrt(m.variances[k]) * normal(rng);
  };

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          const double sig = std::sqrt(m.variance);
          for (Eigen::Index i = 0; i < n; ++i) {
            out.positions(i, 0) = m.mean + sig * normal(rng);
          }
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          for (Eigen::Index i = 0; i < n; ++i) {
            out.positions(i, 0) = draw_mixture(m);
          }
        } else {
          const Mixture1D bim = bimodal_mixture(m.bimodal_variance);
          const double gsig = std::sqrt(m.gauss_variance);
          for (Eigen::Index i = 0; i < n; ++i) {
            out.positions(i, 0) = draw_mixture(bim);
            for (int k = 1; k < m.dim; ++k) {
              out.positions(i, k) = gsig * normal(rng);
            }
          }
        }
      },
      v_);
  return out;
}

std::string DensityModel::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          os << "gaussian(mean=" << m.mean << ",variance=" << m.variance << ")";
        } else if constexpr (std::is_same_v<T, Mixture1D>) {
          os << "mixture(";
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            if (k) os << ";";
            os << m.weights[k] << "*N(" << m.means[k] << "," << m.variances[k] << ")";
          }
          os << ")";
        } else {
          os << "product-bimodal-gauss(dim=" << m.dim
             << ",sigma2=" << m.bimodal_variance
             << ",gauss_sigma2=" << m.gauss_variance << ")";
        }
      },
      v_);
  return os.str();
}

// --------------------------------------------------------------------------
// ObservationFn
// --------------------------------------------------------------------------

ObservationFn ObservationFn::coordinate(int index) {
  if (index < 0) throw config_error("ObservationFn::coordinate: index must be >= 0");
  return ObservationFn(Variant{Coordinate{index}});
}

ObservationFn ObservationFn::constant(double value) {
  if (!std::isfinite(value)) throw config_error("ObservationFn::constant: value must be finite");
  return ObservationFn(Variant{Constant{value}});
}

ObservationFn ObservationFn::quadratic_well() {
  return ObservationFn(Variant{QuadraticWell{}});
}

ObservationFn ObservationFn::shifted(const ObservationFn& h, double c) {
  ObservationFn out = h;
  out.offset_ += c;
  return out;
}

double ObservationFn::operator()(const Eigen::VectorXd& x) const {
  return offset_ + std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Coordinate>) {
          if (m.index >= x.size()) {
            throw std::invalid_argument("ObservationFn: coordinate index out of range");
          }
          return x[m.index];
        } else if constexpr (std::is_same_v<T, Constant>) {
          return m.value;
        } else {
          const double r = x.norm() - 2.0;
          return r * r;
        }
      },
      v_);
}

double ObservationFn::operator()(double x) const {
  Eigen::VectorXd v(1);
  v[0] = x;
  return (*this)(v);
}

Eigen::VectorXd ObservationFn::values(const Ensemble& e) const {
  Eigen::VectorXd out(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    out[i] = (*this)(Eigen::VectorXd(e.positions.row(i)));
  }
  return out;
}

bool ObservationFn::is_constant() const {
  return std::holds_alternative<Constant>(v_);
}

int ObservationFn::coordinate_index() const {
  if (const auto* c = std::get_if<Coordinate>(&v_)) return c->index;
  return -1;
}

std::string ObservationFn::describe() const {
  std::string base = std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Coordinate>) {
          return "coordinate(" + std::to_string(m.index) + ")";
        } else if constexpr (std::is_same_v<T, Constant>) {
          std::ostringstream os;
          os << "constant(" << m.value << ")";
          return os.str();
        } else {
          return "quadratic-well";
        }
      },
      v_);
  if (offset_ != 0.0) {
    std::ostringstream os;
    os << base << "+" << offset_;
    return os.str();
  }
  return base;
}

// --------------------------------------------------------------------------
// Oracles
// --------------------------------------------------------------------------

double exact_gain_1d(const DensityModel& model, const ObservationFn& h, double x) {
  if (model.dim() != 1) {
    throw std::invalid_argument("exact_gain_1d: model must be 1D");
  }
  const double lo = model.support_lo();
  const double hi = model.support_hi();
  if (x < lo || x > hi) {
    throw std::domain_error("exact_gain_1d: x outside the support window");
  }
  auto rho = [&](double z) { return model.pdf1(z); };
  const double mass = adaptive_trapezoid(rho, lo, hi);
  const double h_hat =
      adaptive_trapezoid([&](double z) { return rho(z) * h(z); }, lo, hi) / mass;
  double partial = 0.0;
  if (x > lo) {
    partial = adaptive_trapezoid(
        [&](double z) { return rho(z) * (h(z) - h_hat); }, lo, x);
  }
  return -partial / std::max(rho(x), kDensityFloor);
}

TabulatedGain1D::TabulatedGain1D(const ScalarFn& density, double lo, double hi,
                                 const ScalarFn& h, std::size_t points)
    : lo_(lo), hi_(hi) {
  if (points < 2) throw std::invalid_argument("TabulatedGain1D: need at least 2 points");
  step_ = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> rho(points), hv(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo_ + step_ * static_cast<double>(i);
    rho[i] = density(x);
    hv[i] = h(x);
  }
  // h_hat under the (possibly unnormalized) density
  double mass = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i + 1 < points; ++i) {
    mass += 0.5 * step_ * (rho[i] + rho[i + 1]);
    weighted += 0.5 * step_ * (rho[i] * hv[i] + rho[i + 1] * hv[i + 1]);
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw numeric_error("TabulatedGain1D: density mass is not positive and finite");
  }
  h_hat_ = weighted / mass;

  gain_.resize(points);
  double cum = 0.0;
  gain_[0] = -0.0 / std::max(rho[0], kDensityFloor);
  for (std::size_t i = 1; i < points; ++i) {
    cum += 0.5 * step_ *
           (rho[i - 1] * (hv[i - 1] - h_hat_) + rho[i] * (hv[i] - h_hat_));
    gain_[i] = -cum / std::max(rho[i], kDensityFloor);
  }
  gain_[0] = 0.0;

  potential_.resize(points);
  potential_[0] = 0.0;
  for (std::size_t i = 1; i < points; ++i) {
    potential_[i] = potential_[i - 1] + 0.5 * step_ * (gain_[i - 1] + gain_[i]);
  }
}

TabulatedGain1D TabulatedGain1D::for_model(const DensityModel& model,
                                           const ObservationFn& h,
                                           std::size_t points) {
  if (model.dim() != 1) {
    throw std::invalid_argument("TabulatedGain1D::for_model: model must be 1D");
  }
  return TabulatedGain1D([&](double z) { return model.pdf1(z); },
                         model.support_lo(), model.support_hi(),
                         [&](double z) { return h(z); }, points);
}

double TabulatedGain1D::operator()(double x) const {
  if (x < lo_ || x > hi_) {
    throw std::domain_error("TabulatedGain1D: x outside the support window");
  }
  const double pos = (x - lo_) / step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), gain_.size() - 2);
  const double w = pos - static_cast<double>(i);
  return gain_[i] * (1.0 - w) + gain_[i + 1] * w;
}

double TabulatedGain1D::potential(double x) const {
  if (x < lo_ || x > hi_) {
    throw std::domain_error("TabulatedGain1D: x outside the support window");
  }
  const double pos = (x - lo_) / step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), potential_.size() - 2);
  const double w = pos - static_cast<double>(i);
  return potential_[i] * (1.0 - w) + potential_[i + 1] * w;
}

HomotopyDensity::HomotopyDensity(DensityModel prior, ObservationFn h, double t)
    : prior_(std::move(prior)), h_(std::move(h)), t_(t) {
  if (prior_.dim() != 1) {
    throw std::invalid_argument("HomotopyDensity: prior must be 1D");
  }
  z_ = adaptive_trapezoid([&](double x) { return unnormalized(x); },
                          prior_.support_lo(), prior_.support_hi());
  if (!(z_ > 0.0) || !std::isfinite(z_)) {
    throw numeric_error("HomotopyDensity: normalizer not positive and finite (t=" +
                        std::to_string(t_) + ", h=" + h_.describe() + ")");
  }
}

double HomotopyDensity::unnormalized(double x) const {
  return prior_.pdf1(x) * std::exp(-t_ * h_(x));
}

double HomotopyDensity::pdf(double x) const { return unnormalized(x) / z_; }

double HomotopyDensity::lo() const { return prior_.support_lo(); }
double HomotopyDensity::hi() const { return prior_.support_hi(); }

double homotopy_density(const DensityModel& prior, const ObservationFn& h,
                        double t, double x) {
  return HomotopyDensity(prior, h, t).pdf(x);
}

double expectation(const ScalarFn& density, double lo, double hi,
                   const ScalarFn& psi) {
  const double mass = adaptive_trapezoid(density, lo, hi);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw numeric_error("expectation: density mass is not positive and finite");
  }
  const double weighted = adaptive_trapezoid(
      [&](double x) { return density(x) * psi(x); }, lo, hi);
  return weighted / mass;
}

double expectation(const DensityModel& model, const ScalarFn& psi) {
  if (model.dim() != 1) {
    throw std::invalid_argument("expectation: model must be 1D");
  }
  return expectation([&](double x) { return model.pdf1(x); },
                     model.support_lo(), model.support_hi(), psi);
}

double expectation(const HomotopyDensity& density, const ScalarFn& psi) {
  return expectation([&](double x) { return density.unnormalized(x); },
                     density.lo(), density.hi(), psi);
}

}  // namespace fpf
