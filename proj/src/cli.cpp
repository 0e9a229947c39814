#include "fpf/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fpf/errors.hpp"
#include "fpf/experiments.hpp"
#include "fpf/flow.hpp"
#include "fpf/report.hpp"
#include "fpf/validate.hpp"

namespace fpf::cli {

namespace {

std::vector<std::string> split_names(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::string> echo_lines(const KeyValueConfig& cfg,
                                    const GlobalOptions& opts) {
  std::vector<std::string> lines;
  lines.push_back("seed=" + std::to_string(opts.seed));
  lines.push_back(std::string("deterministic=") + (opts.deterministic ? "1" : "0"));
  lines.push_back("workers=" + std::to_string(opts.workers));
  for (const auto& [k, v] : cfg.echo()) lines.push_back(k + "=" + v);
  return lines;
}

void stamp_report(ExperimentReport& report, const KeyValueConfig& cfg,
                  const GlobalOptions& opts) {
  report.seed = opts.seed;
  report.deterministic = opts.deterministic;
  for (const auto& [k, v] : cfg.echo()) report.echo(k, v);
}

}  // namespace

DensityModel density_from_config(KeyValueConfig& cfg) {
  const std::string kind = cfg.get_string("density", "bimodal");
  if (kind == "bimodal") {
    return DensityModel::bimodal(cfg.get_double("sigma2", 0.2));
  }
  if (kind == "gaussian") {
    return DensityModel::gaussian(cfg.get_double("mean", 0.0),
                                  cfg.get_double("variance", 1.0));
  }
  if (kind == "mixture") {
    const auto w = cfg.get_double_list("weights", {0.5, 0.5});
    const auto m = cfg.get_double_list("means", {-1.0, 1.0});
    const auto v = cfg.get_double_list("variances", {0.2, 0.2});
    return DensityModel::mixture(w, m, v);
  }
  if (kind == "product-bimodal-gauss") {
    const double sigma2 = cfg.get_double("sigma2", 0.2);
    return DensityModel::product_bimodal_gauss(
        static_cast<int>(cfg.get_int("dim", 1)), sigma2,
        cfg.get_double("gauss_sigma2", sigma2));
  }
  throw config_error("config: unknown density '" + kind + "'");
}

ObservationFn observation_from_config(KeyValueConfig& cfg,
                                      const std::string& fallback_kind) {
  const std::string kind = cfg.get_string("observation", fallback_kind);
  if (kind == "coordinate") {
    return ObservationFn::coordinate(
        static_cast<int>(cfg.get_int("observation_index", 0)));
  }
  if (kind == "constant") {
    return ObservationFn::constant(cfg.get_double("observation_value", 0.0));
  }
  if (kind == "quadratic-well") return ObservationFn::quadratic_well();
  throw config_error("config: unknown observation '" + kind + "'");
}

TrainConfig train_from_config(KeyValueConfig& cfg, const GlobalOptions& opts) {
  TrainConfig t;
  t.layers = static_cast<int>(cfg.get_int("layers", t.layers));
  t.width = static_cast<int>(cfg.get_int("width", t.width));
  t.alpha = cfg.get_double("alpha", t.alpha);
  t.batch_size = cfg.get_int("batch_size", t.batch_size);
  t.iterations = cfg.get_int("iterations", t.iterations);
  t.learning_rate = cfg.get_double("learning_rate", t.learning_rate);
  t.beta1 = cfg.get_double("beta1", t.beta1);
  t.beta2 = cfg.get_double("beta2", t.beta2);
  t.adam_eps = cfg.get_double("adam_eps", t.adam_eps);
  t.log_every = cfg.get_int("log_every", t.log_every);
  t.batch_with_replacement = cfg.get_bool("batch_with_replacement", false);
  t.seed = opts.seed;
  t.deterministic = opts.deterministic;
  t.workers = opts.deterministic ? 1 : opts.workers;
  return t;
}

SolverSpec solver_from_config(KeyValueConfig& cfg, const GlobalOptions& opts,
                              const std::string& fallback_kind) {
  SolverSpec spec;
  const std::string kind = cfg.get_string("solver", fallback_kind);
  if (kind == "neural") {
    spec.kind = SolverSpec::Kind::Neural;
    spec.train = train_from_config(cfg, opts);
    spec.warm_iterations = cfg.get_int("warm_iterations", 0);
  } else if (kind == "galerkin") {
    spec.kind = SolverSpec::Kind::Galerkin;
    spec.degree = static_cast<int>(cfg.get_int("degree", 5));
  } else if (kind == "diffusion-map") {
    spec.kind = SolverSpec::Kind::DiffusionMap;
    spec.epsilon = cfg.get_double("epsilon", 0.1);
    spec.dm_max_iter = cfg.get_int("dm_max_iter", 10000);
    spec.dm_tol = cfg.get_double("dm_tol", 1e-9);
  } else if (kind == "oracle") {
    spec.kind = SolverSpec::Kind::Oracle;  // model attached by the caller
  } else {
    throw config_error("config: unknown solver '" + kind + "'");
  }
  spec.workers = opts.deterministic ? 1 : opts.workers;
  return spec;
}

int cmd_train_gain(const GlobalOptions& opts) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(opts.config_path);
  const DensityModel model = density_from_config(cfg);
  const ObservationFn h = observation_from_config(cfg, "coordinate");
  TrainConfig train = train_from_config(cfg, opts);
  train.samples = cfg.get_int("samples", 100);
  const Eigen::Index test_samples = cfg.get_int("test_samples", 0);
  const Eigen::Index grid_points = cfg.get_int("grid_points", 401);
  const std::string init_path = cfg.get_string("init_params", "");
  cfg.require_all_consumed();

  const Ensemble ensemble = model.sample(train.samples, derive_seed(opts.seed, 61));
  std::optional<Ensemble> test;
  if (test_samples > 0) {
    test = model.sample(test_samples, derive_seed(opts.seed, 62));
  }
  std::optional<NetworkParams> init;
  if (!init_path.empty()) init = load_params(init_path);

  const TrainResult result =
      train_gain(ensemble, h, train, init ? &*init : nullptr,
                 test ? &*test : nullptr);

  std::filesystem::create_directories(opts.out_dir);
  const auto comments = echo_lines(cfg, opts);

  {
    nlohmann::json j;
    j["seed"] = opts.seed;
    nlohmann::json config = nlohmann::json::object();
    for (const auto& [k, v] : cfg.echo()) config[k] = v;
    j["config"] = std::move(config);
    j["trainable_parameters"] = result.params.parameter_count();
    j["network"] = nlohmann::json::parse(params_to_json(result.params));
    std::ofstream out(opts.out_dir / "network.json");
    if (!out) throw std::runtime_error("cannot open network.json");
    out << j.dump(2) << "\n";
  }

  MetricTable loss;
  loss.name = "loss";
  loss.columns = {"iteration", "train_loss"};
  if (result.trace.has_test()) loss.columns.push_back("test_loss");
  for (std::size_t i = 0; i < result.trace.iterations.size(); ++i) {
    std::vector<double> row = {static_cast<double>(result.trace.iterations[i]),
                               result.trace.train_loss[i]};
    if (result.trace.has_test()) row.push_back(result.trace.test_loss[i]);
    loss.add_row(std::move(row));
  }
  write_csv(opts.out_dir / "loss.csv", loss, comments);

  // gain along the first coordinate of the support window
  const DensityModel marg = model.marginal(0);
  const bool exact_available = model.dim() == 1 || h.coordinate_index() == 0;
  std::optional<TabulatedGain1D> exact;
  if (exact_available) {
    exact = model.dim() == 1
                ? TabulatedGain1D::for_model(model, h)
                : TabulatedGain1D::for_model(marg, ObservationFn::coordinate(0));
  }
  MetricTable curve;
  curve.name = "gain_curve";
  curve.columns = exact_available ? std::vector<std::string>{"x", "gain", "exact_gain"}
                                  : std::vector<std::string>{"x", "gain"};
  const double lo = marg.support_lo(), hi = marg.support_hi();
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(grid_points - 1);
    Eigen::VectorXd point = Eigen::VectorXd::Zero(model.dim());
    point[0] = x;
    std::vector<double> row = {x, gain(result.params, point)[0]};
    if (exact_available) row.push_back((*exact)(x));
    curve.add_row(std::move(row));
  }
  write_csv(opts.out_dir / "gain_curve.csv", curve, comments);
  return 0;
}

namespace {

HomotopyProblem flow_problem_from_config(KeyValueConfig& cfg,
                                         const GlobalOptions& opts) {
  HomotopyProblem p;
  if (!cfg.has("density")) {
    p.prior = DensityModel::gaussian(cfg.get_double("mean", 0.0),
                                     cfg.get_double("variance", 1.0));
    cfg.get_string("density", "gaussian");
  } else {
    p.prior = density_from_config(cfg);
  }
  p.loglik = observation_from_config(cfg, "quadratic-well");
  p.steps = static_cast<int>(cfg.get_int("steps", 50));
  p.particles = cfg.get_int("particles", 500);
  p.seed = opts.seed;
  p.workers = opts.deterministic ? 1 : opts.workers;
  const auto times = cfg.get_double_list("snapshot_times", {0.0, 0.5, 1.0});
  p.snapshot_times = times;
  return p;
}

}  // namespace

int cmd_experiment(const GlobalOptions& opts) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(opts.config_path);
  const std::string experiment = cfg.require_string("experiment");
  ExperimentReport report;

  if (experiment == "overfit") {
    OverfitConfig oc;
    oc.train = train_from_config(cfg, opts);
    oc.train.samples = cfg.get_int("samples", 100);
    oc.test_samples = cfg.get_int("test_samples", 1000);
    oc.bimodal_variance = cfg.get_double("sigma2", 0.2);
    oc.seed = opts.seed;
    oc.deterministic = opts.deterministic;
    oc.workers = opts.deterministic ? 1 : opts.workers;
    cfg.require_all_consumed();
    report = overfit_experiment(oc);
  } else if (experiment == "dimension-sweep") {
    DimensionSweepConfig dc;
    const auto dims = cfg.get_int_list("dims", {1, 2, 5, 10});
    dc.dims.assign(dims.begin(), dims.end());
    dc.dm_epsilons = cfg.get_double_list("dm_epsilons", {0.1, 0.1, 0.2, 1.0});
    dc.bimodal_variance = cfg.get_double("sigma2", 0.2);
    dc.train = train_from_config(cfg, opts);
    dc.gauss_variance = cfg.get_double("gauss_sigma2", dc.bimodal_variance);
    dc.samples = cfg.get_int("samples", 1000);
    dc.simulations = static_cast<int>(cfg.get_int("simulations", 20));
    dc.dm_max_iter = cfg.get_int("dm_max_iter", 10000);
    dc.dm_tol = cfg.get_double("dm_tol", 1e-9);
    dc.seed = opts.seed;
    dc.deterministic = opts.deterministic;
    dc.workers = opts.deterministic ? 1 : opts.workers;
    cfg.require_all_consumed();
    report = dimension_sweep(dc);
  } else if (experiment == "scaling") {
    ScalingConfig sc;
    const auto ns = cfg.get_int_list("sample_sizes", {100, 200, 500, 1000, 2000, 5000});
    sc.sample_sizes.assign(ns.begin(), ns.end());
    sc.train = train_from_config(cfg, opts);
    sc.dm_epsilon = cfg.get_double("epsilon", 0.1);
    sc.dm_max_iter = cfg.get_int("dm_max_iter", 10000);
    sc.dm_tol = cfg.get_double("dm_tol", 1e-9);
    sc.repetitions = static_cast<int>(cfg.get_int("repetitions", 5));
    sc.bimodal_variance = cfg.get_double("sigma2", 0.2);
    sc.seed = opts.seed;
    sc.deterministic = opts.deterministic;
    cfg.require_all_consumed();
    report = runtime_scaling(sc);
  } else if (experiment == "flow") {
    HomotopyProblem p = flow_problem_from_config(cfg, opts);
    p.solver = solver_from_config(cfg, opts, "neural");
    if (p.solver.kind == SolverSpec::Kind::Neural &&
        p.solver.warm_iterations == 0) {
      p.solver.warm_iterations = 1000;
    }
    cfg.require_all_consumed();
    report = flow_experiment(p);
  } else if (experiment == "flow-mse") {
    FlowMseConfig fc;
    fc.problem = flow_problem_from_config(cfg, opts);
    fc.replicas = static_cast<int>(cfg.get_int("replicas", 100));
    fc.psi = cfg.get_string("psi", "x-indicator");
    const auto names = split_names(
        cfg.get_string("solvers", "neural,galerkin,diffusion-map"));
    for (const auto& name : names) {
      SolverSpec spec;
      spec.workers = opts.deterministic ? 1 : opts.workers;
      if (name == "neural") {
        spec.kind = SolverSpec::Kind::Neural;
        spec.train = train_from_config(cfg, opts);
        spec.warm_iterations = cfg.get_int("warm_iterations", 1000);
      } else if (name == "galerkin") {
        spec.kind = SolverSpec::Kind::Galerkin;
        spec.degree = static_cast<int>(cfg.get_int("degree", 5));
      } else if (name == "diffusion-map") {
        spec.kind = SolverSpec::Kind::DiffusionMap;
        spec.epsilon = cfg.get_double("epsilon", 0.1);
        spec.dm_max_iter = cfg.get_int("dm_max_iter", 10000);
        spec.dm_tol = cfg.get_double("dm_tol", 1e-9);
      } else if (name == "oracle") {
        spec.kind = SolverSpec::Kind::Oracle;
      } else {
        throw config_error("config: unknown solver '" + name + "' in solvers list");
      }
      fc.solvers.push_back(std::move(spec));
    }
    cfg.require_all_consumed();
    report = flow_mse_experiment(fc);
  } else {
    throw config_error("config: unknown experiment '" + experiment + "'");
  }

  stamp_report(report, cfg, opts);
  report.write(opts.out_dir);
  return 0;
}

int cmd_validate(const GlobalOptions& opts) {
  if (!opts.config_path.empty()) {
    // validate accepts a config only to keep the flag set uniform
    KeyValueConfig cfg = KeyValueConfig::parse_file(opts.config_path);
    cfg.require_all_consumed();
  }
  ValidateOptions vo;
  vo.seed = opts.seed;
  vo.workers = opts.deterministic ? 1 : opts.workers;
  const auto results = run_validation_suite(vo);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all properties passed"
                            : std::to_string(failed) + " propert" +
                                  (failed == 1 ? "y" : "ies") + " failed")
            << "\n";
  return std::min(failed, 125);
}

int run(int argc, char** argv) {
  CLI::App app{"Particle-based gain function approximation toolkit"};
  app.require_subcommand(1);

  GlobalOptions opts;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "key=value configuration file");
    if (config_required) c->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "global seed");
    sub->add_flag("--deterministic", opts.deterministic,
                  "single worker, fixed reduction order");
    sub->add_option("--workers", opts.workers, "parallel worker count (0 = all cores)");
  };

  auto* train = app.add_subcommand("train-gain", "train one gain network");
  add_common(train, true);
  auto* experiment = app.add_subcommand("experiment", "run an experiment driver");
  add_common(experiment, true);
  auto* validate = app.add_subcommand("validate", "run the fast invariant suite");
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train_gain(opts);
    if (experiment->parsed()) return cmd_experiment(opts);
    return cmd_validate(opts);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const fit_error& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fpf::cli
