#include "fpf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fpf/errors.hpp"

namespace fpf {

namespace {

TabulatedGain1D exact_gain_table(const DensityModel& model,
                                 const ObservationFn& h) {
  if (model.dim() == 1) return TabulatedGain1D::for_model(model, h);
  if (h.coordinate_index() != 0) {
    throw config_error(
        "mse_gain: multi-dimensional models require the observation h(x) = x_1");
  }
  return TabulatedGain1D::for_model(model.marginal(0),
                                    ObservationFn::coordinate(0));
}

std::string describe_train(const TrainConfig& t) {
  std::ostringstream os;
  os << "layers=" << t.layers << ",width=" << t.width << ",alpha=" << t.alpha
     << ",batch_size=" << t.batch_size << ",iterations=" << t.iterations
     << ",learning_rate=" << t.learning_rate << ",beta1=" << t.beta1
     << ",beta2=" << t.beta2 << ",adam_eps=" << t.adam_eps;
  return os.str();
}

}  // namespace

double gain_mse_at(const GainSolver& solver, const TabulatedGain1D& exact,
                   const Eigen::MatrixXd& points) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    Eigen::VectorXd k_exact = Eigen::VectorXd::Zero(points.cols());
    k_exact[0] = exact(x[0]);
    acc += (solver.evaluate(x) - k_exact).squaredNorm();
  }
  return acc / static_cast<double>(points.rows());
}

double mse_gain(const SolverFactory& make_solver, const DensityModel& model,
                const ObservationFn& h, const MseProtocol& protocol,
                const Exec& exec) {
  if (protocol.seeds.empty()) {
    throw config_error("mse_gain: need at least one seed");
  }
  const TabulatedGain1D exact = exact_gain_table(model, h);
  const int n_seeds = static_cast<int>(protocol.seeds.size());
  std::vector<double> per_seed(protocol.seeds.size(), 0.0);
  std::vector<std::string> failures(protocol.seeds.size());

#pragma omp parallel for schedule(dynamic) num_threads(exec.resolved())
  for (int k = 0; k < n_seeds; ++k) {
    try {
      const std::uint64_t s = protocol.seeds[static_cast<std::size_t>(k)];
      const Ensemble train_ens = model.sample(protocol.train_samples, derive_seed(s, 21));
      const Ensemble eval_ens = model.sample(protocol.eval_samples, derive_seed(s, 22));
      auto solver = make_solver(static_cast<std::size_t>(k));
      solver->fit(train_ens, h);
      per_seed[static_cast<std::size_t>(k)] =
          gain_mse_at(*solver, exact, eval_ens.positions);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (!failures[k].empty()) {
      throw fit_error("mse_gain: simulation " + std::to_string(k) + ": " + failures[k]);
    }
  }
  return std::accumulate(per_seed.begin(), per_seed.end(), 0.0) /
         static_cast<double>(per_seed.size());
}

double mse_gain(const SolverSpec& spec, const DensityModel& model,
                const ObservationFn& h, const MseProtocol& protocol,
                const Exec& exec) {
  if (spec.kind == SolverSpec::Kind::Oracle && !spec.oracle_model) {
    SolverSpec with_model = spec;
    with_model.oracle_model = model;
    return mse_gain(with_model, model, h, protocol, exec);
  }
  auto factory = [&spec, &protocol](std::size_t sim) {
    SolverSpec s = spec;
    s.workers = 1;  // simulations are the parallel axis
    if (s.kind == SolverSpec::Kind::Neural) {
      s.train.seed = derive_seed(protocol.seeds[sim], 23);
    }
    return s.make();
  };
  return mse_gain(factory, model, h, protocol, exec);
}

ExperimentReport dimension_sweep(const DimensionSweepConfig& cfg) {
  if (cfg.dims.empty()) throw config_error("dimension_sweep: dims empty");
  if (cfg.dm_epsilons.size() != cfg.dims.size()) {
    throw config_error("dimension_sweep: dm_epsilons must align with dims");
  }
  if (cfg.simulations < 1) throw config_error("dimension_sweep: simulations must be >= 1");

  const ObservationFn h = ObservationFn::coordinate(0);
  const TabulatedGain1D exact = TabulatedGain1D::for_model(
      DensityModel::bimodal(cfg.bimodal_variance), ObservationFn::coordinate(0));

  const std::size_t n_dims = cfg.dims.size();
  const std::size_t n_sims = static_cast<std::size_t>(cfg.simulations);
  const std::size_t log_steps = static_cast<std::size_t>(
      cfg.train.log_every > 0 ? (cfg.train.iterations + cfg.train.log_every - 1) /
                                    cfg.train.log_every
                              : 0);

  // accumulators: [dim][log step] summed over simulations
  std::vector<std::vector<double>> neural_series(n_dims,
                                                 std::vector<double>(log_steps, 0.0));
  std::vector<std::vector<std::int64_t>> series_iters(
      n_dims, std::vector<std::int64_t>(log_steps, 0));
  std::vector<double> neural_final(n_dims, 0.0);
  std::vector<double> dm_final(n_dims, 0.0);
  std::vector<std::string> failures(n_dims * n_sims);

  const Exec outer{cfg.deterministic ? 1 : cfg.workers};
  const auto total_cells = static_cast<std::int64_t>(n_dims * n_sims);

#pragma omp parallel for schedule(dynamic) num_threads(outer.resolved())
  for (std::int64_t cell = 0; cell < total_cells; ++cell) {
    const std::size_t di = static_cast<std::size_t>(cell) / n_sims;
    try {
      const int d = cfg.dims[di];
      const DensityModel model = DensityModel::product_bimodal_gauss(
          d, cfg.bimodal_variance, cfg.gauss_variance);
      const std::uint64_t cell_seed =
          derive_seed(cfg.seed, 31 + static_cast<std::uint64_t>(cell));
      const Ensemble train_ens = model.sample(cfg.samples, derive_seed(cell_seed, 1));
      const Ensemble eval_ens = model.sample(cfg.samples, derive_seed(cell_seed, 2));

      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cell_seed, 3);
      tc.workers = 1;
      tc.trace_losses = false;

      std::size_t slot = 0;
      const TrainResult result = train_gain(
          train_ens, h, tc, nullptr, nullptr,
          [&](std::int64_t iter, const NetworkParams& params) {
            if (slot >= log_steps) return;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < eval_ens.size(); ++i) {
              const Eigen::VectorXd x = eval_ens.positions.row(i).transpose();
              Eigen::VectorXd k_exact = Eigen::VectorXd::Zero(d);
              k_exact[0] = exact(x[0]);
              acc += (gain(params, x) - k_exact).squaredNorm();
            }
            acc /= static_cast<double>(eval_ens.size());
#pragma omp critical(sweep_series)
            {
              neural_series[di][slot] += acc;
              series_iters[di][slot] = iter;
            }
            if (slot + 1 == log_steps) {
#pragma omp atomic
              neural_final[di] += acc;
            }
            ++slot;
          });
      (void)result;

      DiffusionMapGainSolver dm_solver(cfg.dm_epsilons[di], cfg.dm_max_iter,
                                       cfg.dm_tol, 1);
      dm_solver.fit(train_ens, h);
      const double dm_mse = gain_mse_at(dm_solver, exact, eval_ens.positions);
#pragma omp atomic
      dm_final[di] += dm_mse;
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(cell)] = e.what();
    }
  }
  for (std::size_t c = 0; c < failures.size(); ++c) {
    if (!failures[c].empty()) {
      throw fit_error("dimension_sweep: cell " + std::to_string(c) + ": " + failures[c]);
    }
  }

  ExperimentReport report;
  report.experiment = "dimension-sweep";
  report.seed = cfg.seed;
  report.deterministic = cfg.deterministic;
  report.echo("dims", [&] {
    std::ostringstream os;
    for (std::size_t i = 0; i < cfg.dims.size(); ++i) os << (i ? "," : "") << cfg.dims[i];
    return os.str();
  }());
  report.echo("dm_epsilons", [&] {
    std::ostringstream os;
    for (std::size_t i = 0; i < cfg.dm_epsilons.size(); ++i) {
      os << (i ? "," : "") << cfg.dm_epsilons[i];
    }
    return os.str();
  }());
  report.echo("samples", std::to_string(cfg.samples));
  report.echo("simulations", std::to_string(cfg.simulations));
  report.echo("train", describe_train(cfg.train));
  report.echo("bimodal_variance", format_double(cfg.bimodal_variance));
  report.echo("gauss_variance", format_double(cfg.gauss_variance));

  MetricTable series;
  series.name = "neural_mse_vs_iteration";
  series.columns.push_back("iteration");
  for (int d : cfg.dims) series.columns.push_back("d" + std::to_string(d));
  for (std::size_t s = 0; s < log_steps; ++s) {
    std::vector<double> row;
    row.push_back(static_cast<double>(series_iters[0][s]));
    for (std::size_t di = 0; di < n_dims; ++di) {
      row.push_back(neural_series[di][s] / static_cast<double>(n_sims));
    }
    series.add_row(std::move(row));
  }
  report.tables.push_back(std::move(series));

  MetricTable by_dim;
  by_dim.name = "mse_vs_dimension";
  by_dim.columns = {"dim", "neural_mse", "dm_mse", "dm_epsilon"};
  for (std::size_t di = 0; di < n_dims; ++di) {
    by_dim.add_row({static_cast<double>(cfg.dims[di]),
                    neural_final[di] / static_cast<double>(n_sims),
                    dm_final[di] / static_cast<double>(n_sims),
                    cfg.dm_epsilons[di]});
  }
  report.tables.push_back(std::move(by_dim));
  return report;
}

namespace {

MetricTable trace_table(const std::string& name, const TrainTrace& trace) {
  MetricTable t;
  t.name = name;
  t.columns = {"iteration", "train_loss"};
  if (trace.has_test()) t.columns.push_back("test_loss");
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    std::vector<double> row = {static_cast<double>(trace.iterations[i]),
                               trace.train_loss[i]};
    if (trace.has_test()) row.push_back(trace.test_loss[i]);
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace

ExperimentReport overfit_experiment(const OverfitConfig& cfg) {
  const DensityModel model = DensityModel::bimodal(cfg.bimodal_variance);
  const ObservationFn h = ObservationFn::coordinate(0);

  const Ensemble train_ens =
      model.sample(cfg.train.samples, derive_seed(cfg.seed, 41));
  const Ensemble test_ens =
      model.sample(cfg.test_samples, derive_seed(cfg.seed, 42));

  TrainConfig full = cfg.train;
  full.batch_size = train_ens.size();
  full.seed = derive_seed(cfg.seed, 43);
  full.workers = cfg.deterministic ? 1 : cfg.workers;
  TrainConfig mini = cfg.train;
  mini.seed = full.seed;  // identical seeds, only the batch size differs
  mini.workers = full.workers;

  const TrainResult full_run = train_gain(train_ens, h, full, nullptr, &test_ens);
  const TrainResult mini_run = train_gain(train_ens, h, mini, nullptr, &test_ens);

  ExperimentReport report;
  report.experiment = "overfit";
  report.seed = cfg.seed;
  report.deterministic = cfg.deterministic;
  report.echo("density", model.describe());
  report.echo("observation", h.describe());
  report.echo("samples", std::to_string(train_ens.size()));
  report.echo("test_samples", std::to_string(cfg.test_samples));
  report.echo("mini_batch_size", std::to_string(cfg.train.batch_size));
  report.echo("train", describe_train(cfg.train));
  report.echo("nn_param_count",
              std::to_string(parameter_count(cfg.train.arch(1))));

  report.tables.push_back(trace_table("full_batch_trace", full_run.trace));
  report.tables.push_back(trace_table("mini_batch_trace", mini_run.trace));

  auto summarize = [](const TrainTrace& trace) {
    const std::size_t n = trace.iterations.size();
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (trace.test_loss[i] < trace.test_loss[argmin]) argmin = i;
    }
    return std::vector<double>{
        trace.test_loss[argmin], static_cast<double>(trace.iterations[argmin]),
        trace.test_loss[n - 1], trace.train_loss[n - 1],
        trace.test_loss[n - 1] - trace.train_loss[n - 1]};
  };

  MetricTable summary;
  summary.name = "overfit_summary";
  summary.columns = {"min_test_loss", "min_test_iteration", "final_test_loss",
                     "final_train_loss", "final_gap"};
  summary.add_row("full_batch", summarize(full_run.trace));
  summary.add_row("mini_batch", summarize(mini_run.trace));
  report.tables.push_back(std::move(summary));
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need >= 2 aligned points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExperimentReport runtime_scaling(const ScalingConfig& cfg) {
  if (cfg.repetitions < 1) throw config_error("runtime_scaling: repetitions >= 1");
  const DensityModel model = DensityModel::bimodal(cfg.bimodal_variance);
  const ObservationFn h = ObservationFn::coordinate(0);
  using clock = std::chrono::steady_clock;

  auto timed = [](const std::function<void()>& work) {
    const auto start = clock::now();
    work();
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  ExperimentReport report;
  report.experiment = "scaling";
  report.seed = cfg.seed;
  report.deterministic = cfg.deterministic;
  report.echo("density", model.describe());
  report.echo("dm_epsilon", format_double(cfg.dm_epsilon));
  report.echo("repetitions", std::to_string(cfg.repetitions));
  report.echo("train", describe_train(cfg.train));

  MetricTable timings;
  timings.name = "timings";
  timings.columns = {"samples", "median_seconds", "min_seconds", "max_seconds"};

  std::vector<double> ns, dm_medians, nn_medians;
  for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
    const Eigen::Index n = cfg.sample_sizes[ni];
    const Ensemble ens =
        model.sample(n, derive_seed(cfg.seed, 51 + static_cast<std::uint64_t>(ni)));

    auto run_reps = [&](const std::function<void()>& work) {
      work();  // warm-up, excluded
      std::vector<double> times(static_cast<std::size_t>(cfg.repetitions));
      for (auto& t : times) t = timed(work);
      std::sort(times.begin(), times.end());
      const double median = times[times.size() / 2];
      return std::tuple<double, double, double>{median, times.front(), times.back()};
    };

    // timing runs pin to one worker to avoid contention
    const auto [dm_med, dm_min, dm_max] = run_reps([&] {
      dm_fit(ens, h, cfg.dm_epsilon, cfg.dm_max_iter, cfg.dm_tol, Exec{1});
    });
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 52);
    tc.workers = 1;
    tc.log_every = 0;
    const auto [nn_med, nn_min, nn_max] =
        run_reps([&] { train_gain(ens, h, tc); });

    timings.add_row("diffusion-map",
                    {static_cast<double>(n), dm_med, dm_min, dm_max});
    timings.add_row("neural", {static_cast<double>(n), nn_med, nn_min, nn_max});
    ns.push_back(static_cast<double>(n));
    dm_medians.push_back(dm_med);
    nn_medians.push_back(nn_med);
  }
  report.tables.push_back(std::move(timings));

  MetricTable slopes;
  slopes.name = "slopes";
  slopes.columns = {"loglog_slope"};
  slopes.add_row("diffusion-map", {loglog_slope(ns, dm_medians)});
  slopes.add_row("neural", {loglog_slope(ns, nn_medians)});
  report.tables.push_back(std::move(slopes));
  return report;
}

ExperimentReport flow_experiment(const HomotopyProblem& problem) {
  const FlowTrajectory traj = run_flow(problem);

  ExperimentReport report;
  report.experiment = "flow";
  report.seed = problem.seed;
  report.echo("prior", problem.prior.describe());
  report.echo("loglik", problem.loglik.describe());
  report.echo("steps", std::to_string(problem.steps));
  report.echo("particles", std::to_string(problem.particles));
  report.echo("solver", problem.solver.name());

  MetricTable snaps;
  snaps.name = "flow_snapshots";
  snaps.columns = {"time", "particle"};
  const Eigen::Index d = traj.snapshots.empty() ? 1 : traj.snapshots[0].dim();
  for (Eigen::Index c = 0; c < d; ++c) {
    snaps.columns.push_back("x" + std::to_string(c));
  }
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto& ens = traj.snapshots[s];
    for (Eigen::Index i = 0; i < ens.size(); ++i) {
      std::vector<double> row = {traj.times[s], static_cast<double>(i)};
      for (Eigen::Index c = 0; c < d; ++c) row.push_back(ens.positions(i, c));
      snaps.add_row(std::move(row));
    }
  }
  report.tables.push_back(std::move(snaps));

  MetricTable diag;
  diag.name = "flow_diagnostics";
  diag.columns = {"step", "time", "fit_diagnostic"};
  const double dt = 1.0 / static_cast<double>(problem.steps);
  for (std::size_t s = 0; s < traj.step_diagnostics.size(); ++s) {
    diag.add_row({static_cast<double>(s), dt * static_cast<double>(s),
                  traj.step_diagnostics[s]});
  }
  report.tables.push_back(std::move(diag));
  return report;
}

ScalarFn make_psi(const std::string& name) {
  if (name == "x-indicator") {
    return [](double x) { return x > 0 ? x : 0.0; };
  }
  if (name == "indicator") {
    return [](double x) { return x > 0 ? 1.0 : 0.0; };
  }
  throw config_error("unknown psi '" + name + "' (expected x-indicator or indicator)");
}

ExperimentReport flow_mse_experiment(const FlowMseConfig& cfg) {
  if (cfg.solvers.empty()) throw config_error("flow_mse_experiment: no solvers");
  const ScalarFn psi = make_psi(cfg.psi);

  ExperimentReport report;
  report.experiment = "flow-mse";
  report.seed = cfg.problem.seed;
  report.echo("prior", cfg.problem.prior.describe());
  report.echo("loglik", cfg.problem.loglik.describe());
  report.echo("steps", std::to_string(cfg.problem.steps));
  report.echo("particles", std::to_string(cfg.problem.particles));
  report.echo("replicas", std::to_string(cfg.replicas));
  report.echo("psi", cfg.psi);

  MetricTable table;
  table.name = "flow_mse";
  table.columns = {"time"};
  std::vector<FlowMseSeries> series;
  for (const auto& spec : cfg.solvers) {
    table.columns.push_back(spec.name());
    HomotopyProblem p = cfg.problem;
    p.solver = spec;
    if (p.solver.kind == SolverSpec::Kind::Oracle && !p.solver.oracle_model) {
      p.solver.oracle_model = p.prior;
    }
    series.push_back(flow_mse(p, cfg.replicas, psi));
  }
  for (std::size_t s = 0; s < series[0].times.size(); ++s) {
    std::vector<double> row = {series[0].times[s]};
    for (const auto& ser : series) row.push_back(ser.mse[s]);
    table.add_row(std::move(row));
  }
  report.tables.push_back(std::move(table));
  return report;
}

}  // namespace fpf
