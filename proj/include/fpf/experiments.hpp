#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fpf/flow.hpp"
#include "fpf/gain_solver.hpp"
#include "fpf/report.hpp"

namespace fpf {

// --------------------------------------------------------------------------
// Gain m.s.e. against the quadrature oracle
// --------------------------------------------------------------------------

/// One simulation per seed: sample a training ensemble, fit, then average
/// |K_alg(Y) - K_exact(Y)|^2 over a fresh evaluation ensemble; the result
/// is the mean over seeds.  The exact gain acts on the first coordinate
/// (and is zero elsewhere), so the model must either be 1D or have
/// h(x) = x_1 with independent coordinates.
struct MseProtocol {
  Eigen::Index train_samples = 1000;
  Eigen::Index eval_samples = 1000;
  std::vector<std::uint64_t> seeds = {0};
};

/// Builds the solver for one simulation; called concurrently, once per
/// simulation index.
using SolverFactory = std::function<std::unique_ptr<GainSolver>(std::size_t sim)>;

double mse_gain(const SolverFactory& make_solver, const DensityModel& model,
                const ObservationFn& h, const MseProtocol& protocol,
                const Exec& exec = {});
/// SolverSpec variant; neural training seeds are derived per simulation.
double mse_gain(const SolverSpec& spec, const DensityModel& model,
                const ObservationFn& h, const MseProtocol& protocol,
                const Exec& exec = {});

/// Mean |K_alg - K_exact|^2 of one fitted solver over given points.
double gain_mse_at(const GainSolver& solver, const TabulatedGain1D& exact,
                   const Eigen::MatrixXd& points);

// --------------------------------------------------------------------------
// Experiment drivers
// --------------------------------------------------------------------------

struct DimensionSweepConfig {
  std::vector<int> dims = {1, 2, 5, 10};
  std::vector<double> dm_epsilons = {0.1, 0.1, 0.2, 1.0};  // aligned with dims
  double bimodal_variance = 0.2;
  double gauss_variance = 0.2;
  TrainConfig train;  // neural hyperparameters; samples taken from `samples`
  Eigen::Index samples = 1000;  // training and evaluation ensemble size
  int simulations = 20;
  std::int64_t dm_max_iter = 10000;
  double dm_tol = 1e-9;
  std::uint64_t seed = 0;
  bool deterministic = false;
  int workers = 0;
};

/// Fits the neural and diffusion-map solvers per dimension;
/// tables: neural_mse_vs_iteration (iteration, one column per dim) and
/// mse_vs_dimension (dim, neural_mse, dm_mse, dm_epsilon).
ExperimentReport dimension_sweep(const DimensionSweepConfig& cfg);

struct OverfitConfig {
  TrainConfig train;                 // mini-batch size taken from train.batch_size
  Eigen::Index test_samples = 1000;  // fresh sample count N1
  double bimodal_variance = 0.2;
  std::uint64_t seed = 0;
  bool deterministic = false;
  int workers = 0;
};

/// Two trainings that differ only in batch size (full batch M = N vs the
/// configured mini batch); tables: full_batch_trace, mini_batch_trace,
/// overfit_summary.
ExperimentReport overfit_experiment(const OverfitConfig& cfg);

struct ScalingConfig {
  std::vector<Eigen::Index> sample_sizes = {100, 200, 500, 1000, 2000, 5000};
  TrainConfig train;  // fixed batch size and iteration count
  double dm_epsilon = 0.1;
  std::int64_t dm_max_iter = 10000;
  double dm_tol = 1e-9;
  int repetitions = 5;
  double bimodal_variance = 0.2;
  std::uint64_t seed = 0;
  bool deterministic = false;
};

/// Median-of-repetitions wall-clock timings (warm-up excluded, single
/// worker) for the diffusion-map fit and the full neural training, plus
/// the log-log least-squares slope per solver.  Tables: timings, slopes.
ExperimentReport runtime_scaling(const ScalingConfig& cfg);

/// Runs one flow and serializes the snapshots; tables: flow_snapshots
/// (time, particle, coordinates) and flow_diagnostics (step, time,
/// fit diagnostic).
ExperimentReport flow_experiment(const HomotopyProblem& problem);

/// psi by name: "x-indicator" -> x 1_{x>0}, "indicator" -> 1_{x>0}.
ScalarFn make_psi(const std::string& name);

struct FlowMseConfig {
  HomotopyProblem problem;  // problem.solver ignored; `solvers` is used
  std::vector<SolverSpec> solvers;
  int replicas = 100;
  std::string psi = "x-indicator";
};

/// flow_mse for each solver; table flow_mse has one time column and one
/// column per solver.
ExperimentReport flow_mse_experiment(const FlowMseConfig& cfg);

/// log-log least-squares slope of (x, y) pairs (all positive).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fpf
