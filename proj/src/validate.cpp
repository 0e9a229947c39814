#include "fpf/validate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fpf/diffusion_map.hpp"
#include "fpf/errors.hpp"
#include "fpf/galerkin.hpp"
#include "fpf/gain_solver.hpp"
#include "fpf/train.hpp"

namespace fpf {

namespace {

double grad_entry(const ParamGrad& g, int l, int kind, Eigen::Index i,
                  Eigen::Index j) {
  switch (kind) {
    case 0: return g.W[l](i, j);
    case 1: return g.A[l](i, j);
    default: return g.b[l][i];
  }
}

double& param_entry(NetworkParams& p, int l, int kind, Eigen::Index i,
                    Eigen::Index j) {
  switch (kind) {
    case 0: return p.W[l](i, j);
    case 1: return p.A[l](i, j);
    default: return p.b[l][i];
  }
}

// Enumerates (layer, kind, i, j) for every trainable entry.
template <typename Fn>
void for_each_trainable(const NetworkParams& p, Fn&& fn) {
  for (int l = 0; l < p.layer_count(); ++l) {
    if (l > 0) {
      for (Eigen::Index i = 0; i < p.W[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < p.W[l].cols(); ++j) fn(l, 0, i, j);
      }
    }
    for (Eigen::Index i = 0; i < p.A[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < p.A[l].cols(); ++j) fn(l, 1, i, j);
    }
    for (Eigen::Index i = 0; i < p.b[l].size(); ++i) fn(l, 2, i, Eigen::Index{0});
  }
}

double min_abs_preactivation(const NetworkParams& p, const Eigen::VectorXd& x) {
  // mirror of the forward recursion, tracking the smallest |z|
  const int L = p.layer_count();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.W[0].cols());
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd z = (l == 0) ? (p.A[0] * x + p.b[0]).eval()
                                 : (p.W[l] * h + p.A[l] * x + p.b[l]).eval();
    best = std::min(best, z.cwiseAbs().minCoeff());
    if (l == 0) {
      h = z.unaryExpr([&](double v) {
        const double u = v > 0 ? v : p.alpha * v;
        return u * u;
      });
    } else if (l < L - 1) {
      h = z.unaryExpr([&](double v) { return v > 0 ? v : p.alpha * v; });
    }
  }
  return best;
}

PropertyResult input_gradient_fd(std::uint64_t seed) {
  PropertyResult r{"input-gradient-fd", true, ""};
  std::mt19937_64 rng(derive_seed(seed, 101));
  std::normal_distribution<double> normal;
  const NetworkArch arch{4, 16, 0.3, 3};
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 1000; ++trial) {
    NetworkParams p = init_params(arch, derive_seed(seed, 102 + trial % 7));
    Eigen::VectorXd x(arch.dim);
    for (int k = 0; k < arch.dim; ++k) x[k] = normal(rng);
    if (min_abs_preactivation(p, x) < 1e-3) continue;
    ++checked;
    const Eigen::VectorXd g = gain(p, x);
    const double step = 1e-5;
    for (int k = 0; k < arch.dim; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += step;
      xm[k] -= step;
      const double fd = (forward(p, xp) - forward(p, xm)) / (2.0 * step);
      const double rel = std::abs(fd - g[k]) / std::max(std::abs(fd), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  std::ostringstream os;
  os << "max rel err " << worst << " over " << checked << " points";
  r.detail = os.str();
  r.passed = checked >= 50 && worst < 1e-5;
  return r;
}

PropertyResult parameter_gradient_fd(std::uint64_t seed, bool mutate) {
  PropertyResult r{"parameter-gradient-fd", true, ""};
  const NetworkArch arch{3, 8, 0.3, 2};
  std::mt19937_64 rng(derive_seed(seed, 112));
  std::normal_distribution<double> normal;
  const Eigen::Index M = 16;
  Eigen::MatrixXd batch(M, arch.dim);
  Eigen::VectorXd h_vals(M);

  // resample until every preactivation is at least 1e-3 from a kink, so the
  // finite-difference step cannot cross one
  NetworkParams p = init_params(arch, derive_seed(seed, 111));
  for (int attempt = 0; attempt < 200; ++attempt) {
    for (Eigen::Index i = 0; i < M; ++i) {
      for (int k = 0; k < arch.dim; ++k) batch(i, k) = normal(rng);
      h_vals[i] = batch(i, 0) + 0.3 * batch(i, 1) * batch(i, 1);
    }
    double min_z = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M; ++i) {
      min_z = std::min(min_z, min_abs_preactivation(p, batch.row(i).transpose()));
    }
    if (min_z > 1e-3) break;
    p = init_params(arch, derive_seed(seed, 311 + attempt));
  }
  const double h_hat = h_vals.mean();

  const LossGradParts parts = loss_and_grad_parts(p, batch, h_vals, h_hat);
  ParamGrad analytic = parts.quadratic_grad;
  if (mutate) analytic.scale(-1.0);  // injected sign error in the
                                     // double-backprop term
  analytic.add(parts.linear_grad);

  const double step = 1e-6;
  double worst = 0.0;
  for_each_trainable(p, [&](int l, int kind, Eigen::Index i, Eigen::Index j) {
    double& theta = param_entry(p, l, kind, i, j);
    const double saved = theta;
    theta = saved + step;
    const double lp = loss_and_grad_serial(p, batch, h_vals, h_hat).loss;
    theta = saved - step;
    const double lm = loss_and_grad_serial(p, batch, h_vals, h_hat).loss;
    theta = saved;
    const double fd = (lp - lm) / (2.0 * step);
    const double an = grad_entry(analytic, l, kind, i, j);
    // absolute floor 1e-3: the loss is exactly invariant to the output
    // bias, so that entry compares FD roundoff against an exact zero
    const double rel =
        std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3});
    worst = std::max(worst, rel);
  });
  std::ostringstream os;
  os << "max rel err " << worst;
  r.detail = os.str();
  r.passed = worst < 1e-4;
  return r;
}

PropertyResult prop1_identity() {
  PropertyResult r{"loss-gap-identity", true, ""};
  const DensityModel model = DensityModel::bimodal(0.2);
  const ObservationFn h = ObservationFn::coordinate(0);
  const TabulatedGain1D oracle = TabulatedGain1D::for_model(model, h);
  const double lo = model.support_lo(), hi = model.support_hi();
  const std::size_t n = kFixtureGridPoints;
  const double dx = (hi - lo) / static_cast<double>(n - 1);

  auto pert = [](double x) { return 0.2 * std::sin(x); };
  auto pert_d = [](double x) { return 0.2 * std::cos(x); };

  // J on the tabulation grid with the grid h_hat
  double mass = 0.0, hbar = 0.0;
  std::vector<double> rho(n), xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + dx * static_cast<double>(i);
    rho[i] = model.pdf1(xs[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mass += 0.5 * dx * (rho[i] + rho[i + 1]);
    hbar += 0.5 * dx * (rho[i] * xs[i] + rho[i + 1] * xs[i + 1]);
  }
  hbar /= mass;

  auto j_of = [&](bool perturbed) {
    double acc = 0.0;
    auto integrand = [&](std::size_t i) {
      const double grad = oracle(xs[i]) + (perturbed ? pert_d(xs[i]) : 0.0);
      const double val = oracle.potential(xs[i]) + (perturbed ? pert(xs[i]) : 0.0);
      return (0.5 * grad * grad - (xs[i] - hbar) * val) * rho[i];
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      acc += 0.5 * dx * (integrand(i) + integrand(i + 1));
    }
    return acc / mass;
  };
  double half_norm = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto term = [&](std::size_t k) { return pert_d(xs[k]) * pert_d(xs[k]) * rho[k]; };
    half_norm += 0.5 * dx * (term(i) + term(i + 1));
  }
  half_norm = 0.5 * half_norm / mass;

  const double gap = j_of(true) - j_of(false);
  const double rel = std::abs(gap - half_norm) / std::abs(half_norm);
  std::ostringstream os;
  os << "J gap " << gap << " vs half-norm " << half_norm << " (rel err " << rel << ")";
  r.detail = os.str();
  r.passed = rel < 1e-6;
  return r;
}

PropertyResult weak_form_residual(std::uint64_t seed, int workers) {
  PropertyResult r{"weak-form-residual", true, ""};
  const DensityModel model = DensityModel::bimodal(0.2);
  const ObservationFn h = ObservationFn::coordinate(0);
  // a configuration that trains well enough for the first-order
  // optimality residual to be meaningful
  const Ensemble train_ens = model.sample(1000, derive_seed(seed, 121));
  TrainConfig cfg;
  cfg.seed = derive_seed(seed, 122);
  cfg.learning_rate = 1e-3;
  cfg.workers = workers;
  cfg.log_every = 0;
  const TrainResult result = train_gain(train_ens, h, cfg);

  const Ensemble fresh = model.sample(10000, derive_seed(seed, 123));
  const Eigen::VectorXd h_all = h.values(fresh);
  const double h_hat = h_all.mean();

  // psi in {x, x^2, x^3}; bounds frozen at roughly twice the worst residual
  // observed across seeds 0..4 (0.13 / 0.22 / 0.91); a sign error in the
  // double-backprop term puts every residual far above them
  const double bounds[3] = {0.25, 0.45, 1.8};
  double residuals[3] = {0.0, 0.0, 0.0};
  for (Eigen::Index i = 0; i < fresh.size(); ++i) {
    const double x = fresh.positions(i, 0);
    const double g = gain(result.params, fresh.positions.row(i).transpose())[0];
    const double hc = h_all[i] - h_hat;
    residuals[0] += g * 1.0 - hc * x;
    residuals[1] += g * 2.0 * x - hc * x * x;
    residuals[2] += g * 3.0 * x * x - hc * x * x * x;
  }
  bool ok = true;
  std::ostringstream os;
  for (int k = 0; k < 3; ++k) {
    residuals[k] = std::abs(residuals[k] / static_cast<double>(fresh.size()));
    ok = ok && residuals[k] < bounds[k];
    os << (k ? ", " : "") << "psi=x^" << (k + 1) << ": " << residuals[k]
       << " (bound " << bounds[k] << ")";
  }
  r.detail = os.str();
  r.passed = ok;
  return r;
}

PropertyResult constant_h_zero_gain(std::uint64_t seed, int workers) {
  PropertyResult r{"constant-h-zero-gain", true, ""};
  const DensityModel model = DensityModel::bimodal(0.2);
  const ObservationFn h = ObservationFn::constant(2.5);
  const Ensemble ens = model.sample(100, derive_seed(seed, 131));

  TrainConfig cfg;
  cfg.seed = derive_seed(seed, 132);
  cfg.workers = workers;
  cfg.log_every = 0;
  const TrainResult nn = train_gain(ens, h, cfg);
  double nn_mean = 0.0;
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    nn_mean += std::abs(gain(nn.params, ens.positions.row(i).transpose())[0]);
  }
  nn_mean /= static_cast<double>(ens.size());

  const GalerkinModel gal = galerkin_fit(ens, h, 5);
  const double gal_max = gal.coeffs.cwiseAbs().maxCoeff();

  const DiffusionMapModel dm = dm_fit(ens, h, 0.1);
  double dm_max = 0.0;
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    dm_max = std::max(dm_max, dm_gain(dm, i).cwiseAbs().maxCoeff());
  }

  std::ostringstream os;
  os << "neural mean |K| " << nn_mean << ", galerkin max |c| " << gal_max
     << ", dm max |K| " << dm_max;
  r.detail = os.str();
  r.passed = nn_mean < 0.05 && gal_max < 1e-12 && dm_max < 1e-10;
  return r;
}

PropertyResult homotopy_properties() {
  PropertyResult r{"homotopy-normalization", true, ""};
  const DensityModel prior = DensityModel::gaussian(0.0, 1.0);
  const ObservationFn l = ObservationFn::quadratic_well();
  double worst_mass = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    const HomotopyDensity rho(prior, l, t);
    const double mass = adaptive_trapezoid([&](double x) { return rho.pdf(x); },
                                           rho.lo(), rho.hi());
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  // at t=1 the density must be proportional to prior * e^{-l}
  const HomotopyDensity rho1(prior, l, 1.0);
  double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    const double raw = prior.pdf1(x) * std::exp(-l(x));
    const double ratio = rho1.pdf(x) / raw;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }
  const double ratio_spread = (ratio_hi - ratio_lo) / ratio_hi;
  std::ostringstream os;
  os << "max |mass-1| " << worst_mass << ", t=1 ratio spread " << ratio_spread;
  r.detail = os.str();
  r.passed = worst_mass < 1e-6 && ratio_spread < 1e-8;
  return r;
}

PropertyResult dm_structure(std::uint64_t seed, int workers) {
  PropertyResult r{"dm-markov-fixed-point", true, ""};
  const DensityModel model = DensityModel::bimodal(0.2);
  const Ensemble ens = model.sample(500, derive_seed(seed, 141));
  const DiffusionMapModel dm =
      dm_fit(ens, ObservationFn::coordinate(0), 0.1, 10000, 1e-9, Exec{workers});
  const double row_err =
      (dm.markov.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double min_entry = dm.markov.minCoeff();
  std::ostringstream os;
  os << "max |row sum - 1| " << row_err << ", min entry " << min_entry
     << ", residual " << dm.residual << " after " << dm.sweeps << " sweeps";
  r.detail = os.str();
  r.passed = row_err < 1e-12 && min_entry >= 0.0 && dm.residual < 1e-9;
  return r;
}

PropertyResult determinism(std::uint64_t seed, int workers) {
  PropertyResult r{"seeded-determinism", true, ""};
  const DensityModel model = DensityModel::bimodal(0.2);
  const Ensemble a = model.sample(50, derive_seed(seed, 151));
  const Ensemble b = model.sample(50, derive_seed(seed, 151));
  const bool samples_equal = a.positions == b.positions;

  TrainConfig cfg;
  cfg.samples = 50;
  cfg.iterations = 200;
  cfg.seed = derive_seed(seed, 152);
  cfg.workers = workers;
  cfg.deterministic = true;
  cfg.log_every = 0;
  const ObservationFn h = ObservationFn::coordinate(0);
  const std::string run1 = params_to_json(train_gain(a, h, cfg).params);
  const std::string run2 = params_to_json(train_gain(a, h, cfg).params);
  const bool params_equal = run1 == run2;

  r.detail = std::string("samples ") + (samples_equal ? "identical" : "differ") +
             ", trained parameters " + (params_equal ? "identical" : "differ");
  r.passed = samples_equal && params_equal;
  return r;
}

}  // namespace

std::vector<PropertyResult> run_validation_suite(const ValidateOptions& opts) {
  std::vector<PropertyResult> results;
  results.push_back(input_gradient_fd(opts.seed));
  results.push_back(parameter_gradient_fd(opts.seed, opts.mutate_double_backprop));
  results.push_back(prop1_identity());
  results.push_back(weak_form_residual(opts.seed, opts.workers));
  results.push_back(constant_h_zero_gain(opts.seed, opts.workers));
  results.push_back(homotopy_properties());
  results.push_back(dm_structure(opts.seed, opts.workers));
  results.push_back(determinism(opts.seed, opts.workers));
  return results;
}

}  // namespace fpf
