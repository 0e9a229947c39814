#include "fpf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fpf/errors.hpp"

namespace fpf {

Ensemble flow_step(const Ensemble& ensemble, const GainSolver& solver, double dt) {
  Ensemble out = ensemble;
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    try {
      out.positions.row(i) -= dt * solver.evaluate_particle(i).transpose();
    } catch (const std::exception& e) {
      throw numeric_error("flow_step: particle " + std::to_string(i) + ": " +
                          e.what());
    }
  }
  return out;
}

FlowTrajectory run_flow(const HomotopyProblem& problem,
                        const FlowObserver& observer) {
  if (problem.steps < 1) throw config_error("run_flow: steps must be >= 1");
  if (problem.particles < 1) throw config_error("run_flow: particles must be >= 1");
  const int S = problem.steps;
  const double dt = 1.0 / static_cast<double>(S);

  SolverSpec spec = problem.solver;
  if (spec.kind == SolverSpec::Kind::Oracle && !spec.oracle_model) {
    spec.oracle_model = problem.prior;
  }
  if (spec.workers == 0) spec.workers = problem.workers;
  auto solver = spec.make();

  Ensemble current = problem.prior.sample(problem.particles, problem.seed);

  FlowTrajectory traj;
  auto maybe_snapshot = [&](double t) {
    for (double want : problem.snapshot_times) {
      if (std::abs(want - t) < 0.5 * dt) {
        traj.times.push_back(t);
        traj.snapshots.push_back(current);
        return;
      }
    }
  };

  maybe_snapshot(0.0);
  if (observer) observer(0, 0.0, current.positions);

  for (int s = 0; s < S; ++s) {
    const double t = dt * static_cast<double>(s);
    try {
      solver->fit(current, problem.loglik, SolverContext{t});
      current = flow_step(current, *solver, dt);
    } catch (const std::exception& e) {
      throw numeric_error("run_flow: step " + std::to_string(s) + " (t=" +
                          std::to_string(t) + "): " + e.what());
    }
    traj.step_diagnostics.push_back(solver->fit_diagnostic());
    const double t_next = dt * static_cast<double>(s + 1);
    maybe_snapshot(t_next);
    if (observer) observer(s + 1, t_next, current.positions);
  }
  return traj;
}

FlowMseSeries flow_mse(const HomotopyProblem& problem, int replicas,
                       const ScalarFn& psi) {
  if (replicas < 1) throw config_error("flow_mse: replicas must be >= 1");
  if (problem.prior.dim() != 1) {
    throw config_error("flow_mse: requires a 1D prior");
  }
  const int S = problem.steps;
  const double dt = 1.0 / static_cast<double>(S);

  // reference E[psi] under the analytic homotopy, shared across replicas
  std::vector<double> reference(static_cast<std::size_t>(S) + 1);
  for (int s = 0; s <= S; ++s) {
    const HomotopyDensity rho(problem.prior, problem.loglik,
                              dt * static_cast<double>(s));
    reference[static_cast<std::size_t>(s)] = expectation(rho, psi);
  }

  Eigen::MatrixXd psi_means(replicas, S + 1);
  std::vector<std::string> failures(static_cast<std::size_t>(replicas));
  const int outer = Exec{problem.workers}.resolved();

#pragma omp parallel for schedule(dynamic) num_threads(outer)
  for (int k = 0; k < replicas; ++k) {
    HomotopyProblem replica = problem;
    replica.seed = derive_seed(problem.seed, 0x9f0 + static_cast<std::uint64_t>(k));
    replica.workers = 1;  // replicas are the parallel axis
    replica.snapshot_times.clear();
    try {
      run_flow(replica, [&](int step, double, const Eigen::MatrixXd& pos) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < pos.rows(); ++i) sum += psi(pos(i, 0));
        psi_means(k, step) = sum / static_cast<double>(pos.rows());
      });
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (int k = 0; k < replicas; ++k) {
    if (!failures[static_cast<std::size_t>(k)].empty()) {
      throw numeric_error("flow_mse: replica " + std::to_string(k) + ": " +
                          failures[static_cast<std::size_t>(k)]);
    }
  }

  FlowMseSeries series;
  series.times.resize(static_cast<std::size_t>(S) + 1);
  series.mse.resize(static_cast<std::size_t>(S) + 1);
  for (int s = 0; s <= S; ++s) {
    series.times[static_cast<std::size_t>(s)] = dt * static_cast<double>(s);
    double acc = 0.0;
    for (int k = 0; k < replicas; ++k) {
      const double dev = psi_means(k, s) - reference[static_cast<std::size_t>(s)];
      acc += dev * dev;
    }
    series.mse[static_cast<std::size_t>(s)] = acc / static_cast<double>(replicas);
  }
  return series;
}

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(f - lo), std::abs(f - hi)});
  }
  return d;
}

}  // namespace fpf
