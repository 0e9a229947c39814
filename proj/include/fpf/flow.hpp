#pragma once

#include <functional>
#include <vector>

#include "fpf/gain_solver.hpp"

namespace fpf {

/// Transport from the prior to the posterior rho0 e^{-l} / Z over t in
/// [0, 1] with S explicit Euler steps of size 1/S.
struct HomotopyProblem {
  DensityModel prior = DensityModel::gaussian(0.0, 1.0);
  ObservationFn loglik = ObservationFn::quadratic_well();
  int steps = 50;  // S
  SolverSpec solver;
  Eigen::Index particles = 500;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times = {0.0, 0.5, 1.0};
  int workers = 0;
};

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Ensemble> snapshots;
  std::vector<double> step_diagnostics;  // solver fit diagnostic per step
};

/// One explicit Euler step X_i <- X_i - dt K(X_i); the solver must already
/// be fitted to this ensemble.  Evaluation failures are rethrown with the
/// particle index attached.
Ensemble flow_step(const Ensemble& ensemble, const GainSolver& solver, double dt);

/// Called after every step (and once for the initial state) with the step
/// index (0 for the initial state), the time, and the current positions.
using FlowObserver =
    std::function<void(int step, double time, const Eigen::MatrixXd& positions)>;

/// Fit-then-step loop over the time grid.  The neural solver keeps its
/// parameters between steps (warm start); Galerkin, diffusion-map and
/// oracle solvers refit from scratch.  Errors are rethrown with the step
/// index attached.
FlowTrajectory run_flow(const HomotopyProblem& problem,
                        const FlowObserver& observer = {});

struct FlowMseSeries {
  std::vector<double> times;  // S+1 entries, t = s/S
  std::vector<double> mse;
};

/// mse_t = (1/K) sum_k [ (1/N) sum_i psi(X_t^{k,i}) - int psi rho(t,.) ]^2
/// over K independent replicas (seeds derived from problem.seed); the
/// reference integral comes from quadrature against the analytic homotopy.
/// Replicas run in parallel.
FlowMseSeries flow_mse(const HomotopyProblem& problem, int replicas,
                       const ScalarFn& psi);

/// Kolmogorov-Smirnov sup-distance between the empirical distribution of
/// `samples` and the reference CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

}  // namespace fpf
