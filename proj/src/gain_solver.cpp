#include "fpf/gain_solver.hpp"

#include <stdexcept>

#include "fpf/errors.hpp"

namespace fpf {

void GainSolver::mark_fitted(const Ensemble& ensemble) {
  fit_positions_ = ensemble.positions;
  fitted_ = true;
}

void GainSolver::require_fitted() const {
  if (!fitted_) throw std::logic_error("GainSolver: evaluate before fit");
}

Eigen::VectorXd GainSolver::evaluate_particle(Eigen::Index i) const {
  require_fitted();
  if (i < 0 || i >= fit_positions_.rows()) {
    throw std::invalid_argument("GainSolver: particle index out of range");
  }
  return evaluate(fit_positions_.row(i).transpose());
}

NeuralGainSolver::NeuralGainSolver(TrainConfig cfg, std::int64_t warm_iterations)
    : cfg_(std::move(cfg)), warm_iterations_(warm_iterations) {}

void NeuralGainSolver::fit(const Ensemble& ensemble, const ObservationFn& h,
                           const SolverContext&) {
  TrainConfig cfg = cfg_;
  const bool warm = params_.has_value() && warm_iterations_ > 0;
  if (warm) cfg.iterations = warm_iterations_;
  cfg.seed = derive_seed(cfg_.seed, 0xf17 + static_cast<std::uint64_t>(fits_));
  cfg.log_every = 0;
  const TrainResult result =
      train_gain(ensemble, h, cfg, warm ? &*params_ : nullptr);
  params_ = result.params;
  last_loss_ = evaluate_loss(*params_, ensemble, h, cfg.exec());
  ++fits_;
  mark_fitted(ensemble);
}

Eigen::VectorXd NeuralGainSolver::evaluate(const Eigen::VectorXd& x) const {
  require_fitted();
  return gain(*params_, x);
}

const NetworkParams& NeuralGainSolver::params() const {
  require_fitted();
  return *params_;
}

void NeuralGainSolver::reset() {
  params_.reset();
  fits_ = 0;
}

void GalerkinGainSolver::fit(const Ensemble& ensemble, const ObservationFn& h,
                             const SolverContext&) {
  model_ = galerkin_fit(ensemble, h, degree_);
  mark_fitted(ensemble);
}

Eigen::VectorXd GalerkinGainSolver::evaluate(const Eigen::VectorXd& x) const {
  require_fitted();
  return galerkin_gain(*model_, x);
}

double GalerkinGainSolver::fit_diagnostic() const {
  return model_ ? model_->normal_residual : 0.0;
}

const GalerkinModel& GalerkinGainSolver::model() const {
  require_fitted();
  return *model_;
}

void DiffusionMapGainSolver::fit(const Ensemble& ensemble, const ObservationFn& h,
                                 const SolverContext&) {
  model_ = dm_fit(ensemble, h, epsilon_, max_iter_, tol_, Exec{workers_});
  mark_fitted(ensemble);
}

Eigen::VectorXd DiffusionMapGainSolver::evaluate(const Eigen::VectorXd& x) const {
  require_fitted();
  return dm_gain_at(*model_, x);
}

Eigen::VectorXd DiffusionMapGainSolver::evaluate_particle(Eigen::Index i) const {
  require_fitted();
  return dm_gain(*model_, i);
}

double DiffusionMapGainSolver::fit_diagnostic() const {
  return model_ ? model_->residual : 0.0;
}

const DiffusionMapModel& DiffusionMapGainSolver::model() const {
  require_fitted();
  return *model_;
}

OracleGainSolver::OracleGainSolver(DensityModel model)
    : model_(std::move(model)), dim_(model_.dim()) {}

void OracleGainSolver::fit(const Ensemble& ensemble, const ObservationFn& h,
                           const SolverContext& ctx) {
  if (dim_ == 1) {
    const DensityModel prior = model_;
    const double t = ctx.time;
    if (t == 0.0) {
      table_ = TabulatedGain1D::for_model(prior, h);
    } else {
      table_ = TabulatedGain1D(
          [prior, h, t](double x) {
            return prior.pdf1(x) * std::exp(-t * h(x));
          },
          prior.support_lo(), prior.support_hi(),
          [h](double x) { return h(x); });
    }
  } else {
    if (h.coordinate_index() != 0) {
      throw config_error(
          "oracle-1d: multi-dimensional models require the observation "
          "h(x) = x_1");
    }
    if (ctx.time != 0.0) {
      throw config_error("oracle-1d: homotopy fits require a 1D model");
    }
    const DensityModel marg = model_.marginal(0);
    table_ = TabulatedGain1D::for_model(marg, ObservationFn::coordinate(0));
  }
  mark_fitted(ensemble);
}

Eigen::VectorXd OracleGainSolver::evaluate(const Eigen::VectorXd& x) const {
  require_fitted();
  Eigen::VectorXd k = Eigen::VectorXd::Zero(x.size());
  k[0] = (*table_)(x[0]);
  return k;
}

const TabulatedGain1D& OracleGainSolver::table() const {
  require_fitted();
  return *table_;
}

std::unique_ptr<GainSolver> SolverSpec::make() const {
  switch (kind) {
    case Kind::Neural: {
      TrainConfig cfg = train;
      if (workers != 0 && cfg.workers == 0) cfg.workers = workers;
      return std::make_unique<NeuralGainSolver>(cfg, warm_iterations);
    }
    case Kind::Galerkin:
      return std::make_unique<GalerkinGainSolver>(degree);
    case Kind::DiffusionMap:
      return std::make_unique<DiffusionMapGainSolver>(epsilon, dm_max_iter,
                                                      dm_tol, workers);
    case Kind::Oracle:
      if (!oracle_model) {
        throw config_error("SolverSpec: oracle solver needs a density model");
      }
      return std::make_unique<OracleGainSolver>(*oracle_model);
  }
  throw std::logic_error("SolverSpec: unknown kind");
}

std::string SolverSpec::name() const {
  switch (kind) {
    case Kind::Neural: return "neural";
    case Kind::Galerkin: return "galerkin";
    case Kind::DiffusionMap: return "diffusion-map";
    case Kind::Oracle: return "oracle-1d";
  }
  return "?";
}

}  // namespace fpf
