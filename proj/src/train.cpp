#include "fpf/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fpf/errors.hpp"

namespace fpf {

void TrainConfig::validate(Eigen::Index ensemble_size) const {
  if (batch_size < 1 || batch_size > ensemble_size) {
    throw config_error("TrainConfig: batch_size must satisfy 1 <= M <= N");
  }
  if (iterations < 1) throw config_error("TrainConfig: iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw config_error("TrainConfig: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw config_error("TrainConfig: betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw config_error("TrainConfig: adam_eps must be > 0");
  if (log_every < 0) throw config_error("TrainConfig: log_every must be >= 0");
}

AdamState AdamState::zeros_like(const NetworkParams& params) {
  AdamState s;
  s.m = ParamGrad::zeros_like(params);
  s.v = ParamGrad::zeros_like(params);
  return s;
}

namespace {

void adam_update(Eigen::Ref<Eigen::MatrixXd> theta, Eigen::Ref<Eigen::MatrixXd> m,
                 Eigen::Ref<Eigen::MatrixXd> v, const Eigen::MatrixXd& g,
                 double lr, double b1, double b2, double eps, double bc1,
                 double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v.array().matrix() + (1.0 - b2) * g.array().square().matrix();
  const auto m_hat = m.array() / bc1;
  const auto v_hat = v.array() / bc2;
  theta.array() -= lr * m_hat / (v_hat.sqrt() + eps);
}

}  // namespace

void adam_step(AdamState& state, NetworkParams& params, const ParamGrad& grad,
               const TrainConfig& cfg) {
  if (!grad.all_finite()) {
    throw numeric_error("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const int L = params.layer_count();
  for (int l = 0; l < L; ++l) {
    if (l > 0) {
      adam_update(params.W[l], state.m.W[l], state.v.W[l], grad.W[l],
                  cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, bc1, bc2);
    }
    adam_update(params.A[l], state.m.A[l], state.v.A[l], grad.A[l],
                cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, bc1, bc2);
    adam_update(params.b[l], state.m.b[l], state.v.b[l], grad.b[l],
                cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, bc1, bc2);
  }
}

namespace {

/// Floyd's algorithm: M distinct indices from [0, n), O(M) draws, returned
/// in ascending order so downstream reductions have a fixed order.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n,
                                                     Eigen::Index m,
                                                     std::mt19937_64& rng) {
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = n - m; j < n; ++j) {
    std::uniform_int_distribution<Eigen::Index> u(0, j);
    const Eigen::Index t = u(rng);
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) {
      picked.push_back(j);
    } else {
      picked.push_back(t);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<Eigen::Index> sample_with_replacement(Eigen::Index n, Eigen::Index m,
                                                  std::mt19937_64& rng) {
  std::vector<Eigen::Index> picked(static_cast<std::size_t>(m));
  std::uniform_int_distribution<Eigen::Index> u(0, n - 1);
  for (auto& idx : picked) idx = u(rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

TrainResult train_gain(const Ensemble& ensemble, const ObservationFn& h,
                       const TrainConfig& cfg, const NetworkParams* init,
                       const Ensemble* test, const TrainCallback& on_log) {
  cfg.validate(ensemble.size());
  const Eigen::Index N = ensemble.size();
  const Eigen::Index M = cfg.batch_size;
  const int d = static_cast<int>(ensemble.dim());
  const Exec exec = cfg.exec();

  TrainResult result;
  result.params = init ? *init : init_params(cfg.arch(d), derive_seed(cfg.seed, 1));
  if (result.params.input_dim != d) {
    throw config_error("train_gain: warm-start parameters have wrong input dimension");
  }
  AdamState state = AdamState::zeros_like(result.params);

  const Eigen::VectorXd h_all = h.values(ensemble);
  const double h_hat = h_all.mean();

  std::mt19937_64 batch_rng(derive_seed(cfg.seed, 2));
  const bool full_batch = (M == N);

  Eigen::MatrixXd batch(M, d);
  Eigen::VectorXd batch_h(M);
  if (full_batch) {
    batch = ensemble.positions;
    batch_h = h_all;
  }

  double interval_loss_sum = 0.0;
  std::int64_t interval_count = 0;
  for (std::int64_t t = 1; t <= cfg.iterations; ++t) {
    if (!full_batch) {
      const auto idx = cfg.batch_with_replacement
                           ? sample_with_replacement(N, M, batch_rng)
                           : sample_without_replacement(N, M, batch_rng);
      for (Eigen::Index r = 0; r < M; ++r) {
        batch.row(r) = ensemble.positions.row(idx[static_cast<std::size_t>(r)]);
        batch_h[r] = h_all[idx[static_cast<std::size_t>(r)]];
      }
    }
    try {
      const LossGrad lg = loss_and_grad(result.params, batch, batch_h, h_hat, exec);
      adam_step(state, result.params, lg.grad, cfg);
      result.final_loss = lg.loss;
      interval_loss_sum += lg.loss;
      interval_count += 1;
    } catch (const numeric_error& e) {
      throw numeric_error("train_gain: iteration " + std::to_string(t) + ": " +
                          e.what());
    }

    if (cfg.log_every > 0 && (t % cfg.log_every == 0 || t == cfg.iterations)) {
      if (cfg.trace_losses) {
        result.trace.iterations.push_back(t);
        result.trace.train_loss.push_back(
            evaluate_loss(result.params, ensemble, h, exec));
        if (test != nullptr) {
          result.trace.test_loss.push_back(
              evaluate_loss(result.params, *test, h, exec));
        }
        result.trace.batch_loss.push_back(interval_loss_sum /
                                          static_cast<double>(interval_count));
        interval_loss_sum = 0.0;
        interval_count = 0;
      }
      if (on_log) on_log(t, result.params);
    }
  }
  return result;
}

double evaluate_loss(const NetworkParams& params, const Ensemble& ensemble,
                     const ObservationFn& h, const Exec& exec) {
  const Eigen::VectorXd h_all = h.values(ensemble);
  const double h_hat = h_all.mean();
  const Eigen::Index N = ensemble.size();

  auto block_sum = [&](Eigen::Index begin, Eigen::Index end) {
    double s = 0.0;
    for (Eigen::Index i = begin; i < end; ++i) {
      const GainEvaluation ev =
          evaluate_with_gradient(params, ensemble.positions.row(i).transpose());
      s += 0.5 * ev.gradient.squaredNorm() - ev.value * (h_all[i] - h_hat);
    }
    return s;
  };

  double total = 0.0;
  if (exec.serial()) {
    total = block_sum(0, N);
  } else {
    const auto blocks = index_blocks(N, exec.resolved());
    std::vector<double> partial(blocks.size(), 0.0);
#pragma omp parallel for schedule(static, 1) num_threads(exec.resolved())
    for (int k = 0; k < static_cast<int>(blocks.size()); ++k) {
      partial[static_cast<std::size_t>(k)] =
          block_sum(blocks[static_cast<std::size_t>(k)].first,
                    blocks[static_cast<std::size_t>(k)].second);
    }
    total = std::accumulate(partial.begin(), partial.end(), 0.0);
  }
  return total / static_cast<double>(N);
}

double empirical_objective(const PotentialFn& potential, const Ensemble& ensemble,
                           const ObservationFn& h) {
  const Eigen::VectorXd h_all = h.values(ensemble);
  const double h_hat = h_all.mean();
  double total = 0.0;
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const auto [value, grad] = potential(ensemble.positions.row(i).transpose());
    total += 0.5 * grad.squaredNorm() - value * (h_all[i] - h_hat);
  }
  return total / static_cast<double>(ensemble.size());
}

}  // namespace fpf
