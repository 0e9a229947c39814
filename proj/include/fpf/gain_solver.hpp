#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fpf/density.hpp"
#include "fpf/diffusion_map.hpp"
#include "fpf/galerkin.hpp"
#include "fpf/train.hpp"

namespace fpf {

/// Extra information available when a solver is fitted inside the homotopy
/// flow; `time` is the homotopy parameter of the current step.
struct SolverContext {
  double time = 0.0;
};

/// Common contract of the gain approximators: fit to an ensemble with an
/// observation function, then evaluate the gain vector anywhere (or, for
/// particle-indexed methods, cheaper at the fitted particles).
class GainSolver {
 public:
  virtual ~GainSolver() = default;

  virtual void fit(const Ensemble& ensemble, const ObservationFn& h,
                   const SolverContext& ctx = {}) = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd evaluate_particle(Eigen::Index i) const;
  virtual std::string name() const = 0;
  /// Training loss (neural), fixed-point residual (DM), or normal-equation
  /// residual (Galerkin) of the latest fit.
  virtual double fit_diagnostic() const { return 0.0; }

  bool fitted() const { return fitted_; }

 protected:
  void mark_fitted(const Ensemble& ensemble);
  void require_fitted() const;
  Eigen::MatrixXd fit_positions_;

 private:
  bool fitted_ = false;
};

class NeuralGainSolver final : public GainSolver {
 public:
  /// warm_iterations, when > 0, replaces cfg.iterations on every fit after
  /// the first, starting from the previous parameters.
  explicit NeuralGainSolver(TrainConfig cfg, std::int64_t warm_iterations = 0);

  void fit(const Ensemble& ensemble, const ObservationFn& h,
           const SolverContext& ctx = {}) override;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  std::string name() const override { return "neural"; }
  double fit_diagnostic() const override { return last_loss_; }

  const NetworkParams& params() const;
  void reset();  // drop warm-start state

 private:
  TrainConfig cfg_;
  std::int64_t warm_iterations_;
  std::int64_t fits_ = 0;
  std::optional<NetworkParams> params_;
  double last_loss_ = 0.0;
};

class GalerkinGainSolver final : public GainSolver {
 public:
  explicit GalerkinGainSolver(int degree = 5) : degree_(degree) {}

  void fit(const Ensemble& ensemble, const ObservationFn& h,
           const SolverContext& ctx = {}) override;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  std::string name() const override { return "galerkin"; }
  double fit_diagnostic() const override;

  const GalerkinModel& model() const;

 private:
  int degree_;
  std::optional<GalerkinModel> model_;
};

class DiffusionMapGainSolver final : public GainSolver {
 public:
  DiffusionMapGainSolver(double epsilon, std::int64_t max_iter = 10000,
                         double tol = 1e-9, int workers = 0)
      : epsilon_(epsilon), max_iter_(max_iter), tol_(tol), workers_(workers) {}

  void fit(const Ensemble& ensemble, const ObservationFn& h,
           const SolverContext& ctx = {}) override;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd evaluate_particle(Eigen::Index i) const override;
  std::string name() const override { return "diffusion-map"; }
  double fit_diagnostic() const override;

  const DiffusionMapModel& model() const;

 private:
  double epsilon_;
  std::int64_t max_iter_;
  double tol_;
  int workers_;
  std::optional<DiffusionMapModel> model_;
};

/// Quadrature ground truth: the exact gain of the declared density on the
/// first coordinate, zeros elsewhere.  Inside the flow (ctx.time > 0) the
/// density is the homotopy rho0 e^{-t h}; the observation must then be 1D.
/// For multi-dimensional models the observation must be coordinate(0).
class OracleGainSolver final : public GainSolver {
 public:
  explicit OracleGainSolver(DensityModel model);

  void fit(const Ensemble& ensemble, const ObservationFn& h,
           const SolverContext& ctx = {}) override;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  std::string name() const override { return "oracle-1d"; }

  const TabulatedGain1D& table() const;

 private:
  DensityModel model_;
  std::optional<TabulatedGain1D> table_;
  int dim_ = 1;
};

/// Solver choice + hyperparameters as they appear in configuration files.
struct SolverSpec {
  enum class Kind { Neural, Galerkin, DiffusionMap, Oracle };
  Kind kind = Kind::Neural;
  TrainConfig train;                // neural
  std::int64_t warm_iterations = 0; // neural, flow warm start
  int degree = 5;                   // galerkin
  double epsilon = 0.1;             // diffusion map
  std::int64_t dm_max_iter = 10000;
  double dm_tol = 1e-9;
  std::optional<DensityModel> oracle_model;  // oracle
  int workers = 0;

  std::unique_ptr<GainSolver> make() const;
  std::string name() const;
};

}  // namespace fpf
