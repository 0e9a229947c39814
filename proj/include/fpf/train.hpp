#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fpf/density.hpp"
#include "fpf/network.hpp"

namespace fpf {

/// Training hyperparameters; defaults follow the reference configuration
/// (L=4, m=32, alpha=0.3, M=10, N=100, T=1e4, eta=1e-4, beta=0.9/0.999).
struct TrainConfig {
  int layers = 4;
  int width = 32;
  double alpha = 0.3;
  Eigen::Index batch_size = 10;   // M
  Eigen::Index samples = 100;     // N, used by drivers that sample ensembles
  std::int64_t iterations = 10000;  // T
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool deterministic = false;
  int workers = 0;
  std::int64_t log_every = 100;  // 0 disables the trace
  bool trace_losses = true;  // false: fire on_log on cadence, skip the loss trace
  bool batch_with_replacement = false;

  void validate(Eigen::Index ensemble_size) const;  // throws config_error
  NetworkArch arch(int dim) const { return {layers, width, alpha, dim}; }
  Exec exec() const { return Exec{deterministic ? 1 : workers}; }
};

/// First/second moment accumulators congruent to the parameters.
struct AdamState {
  ParamGrad m, v;
  std::int64_t step = 0;

  static AdamState zeros_like(const NetworkParams& params);
};

/// Bias-corrected Adam update; W[0] is masked out and stays zero.
/// Throws numeric_error on non-finite gradients.
void adam_step(AdamState& state, NetworkParams& params, const ParamGrad& grad,
               const TrainConfig& cfg);

struct TrainTrace {
  std::vector<std::int64_t> iterations;
  std::vector<double> train_loss;
  std::vector<double> test_loss;  // empty when no test ensemble is configured
  /// Mean of the optimizer's batch losses over each logging interval; a
  /// smoothed descent signal that costs nothing extra to record.
  std::vector<double> batch_loss;
  bool has_test() const { return !test_loss.empty(); }
};

struct TrainResult {
  NetworkParams params;
  TrainTrace trace;
  double final_loss = 0.0;  // last batch loss seen by the optimizer
};

using TrainCallback =
    std::function<void(std::int64_t iteration, const NetworkParams&)>;

/// Batched stochastic minimization of the empirical objective: each
/// iteration draws a uniform batch without replacement (the whole ensemble
/// when M == N), evaluates loss_and_grad with the full-ensemble h_hat, and
/// applies one Adam step.  `init` warm-starts the parameters.  Losses are
/// logged every cfg.log_every iterations (test loss only when `test` is
/// given); `on_log` fires on the same cadence.
TrainResult train_gain(const Ensemble& ensemble, const ObservationFn& h,
                       const TrainConfig& cfg,
                       const NetworkParams* init = nullptr,
                       const Ensemble* test = nullptr,
                       const TrainCallback& on_log = {});

/// Full-ensemble empirical objective with the ensemble's own h_hat.
double evaluate_loss(const NetworkParams& params, const Ensemble& ensemble,
                     const ObservationFn& h, const Exec& exec = {});

/// The same objective for an arbitrary potential supplied as
/// x -> (value, gradient); lets quadrature oracles stand in for networks.
using PotentialFn =
    std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;
double empirical_objective(const PotentialFn& potential, const Ensemble& ensemble,
                           const ObservationFn& h);

}  // namespace fpf
