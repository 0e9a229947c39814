#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fpf/parallel.hpp"

namespace fpf {

/// Shape of the skip-connected feedforward network: `layers` weight
/// transitions (layers >= 2), hidden width `width`, leak parameter `alpha`,
/// input dimension `dim`.  Widths are [dim, width, ..., width, 1].
struct NetworkArch {
  int layers = 4;
  int width = 32;
  double alpha = 0.3;
  int dim = 1;
};

/// Per-transition weights of f(x) = h_L, h_{l+1} = sigma_l(W_l h_l + b_l + A_l x),
/// h_0 = 0.  W[0] is identically zero and never updated.  Activations:
/// squared leaky ReLU on the first transition, leaky ReLU in between,
/// identity on the last.
struct NetworkParams {
  int input_dim = 0;
  double alpha = 0.3;
  std::vector<Eigen::MatrixXd> W;  // W[l]: widths[l+1] x widths[l]
  std::vector<Eigen::MatrixXd> A;  // A[l]: widths[l+1] x input_dim
  std::vector<Eigen::VectorXd> b;  // b[l]: widths[l+1]

  int layer_count() const { return static_cast<int>(W.size()); }
  std::vector<int> widths() const;
  /// Trainable parameter count (W[0] excluded).
  std::int64_t parameter_count() const;
  bool all_finite() const;
};

/// Trainable parameter count for an architecture without materializing it.
std::int64_t parameter_count(const NetworkArch& arch);

/// Scaled-uniform init: A and W entries uniform in
/// +-sqrt(6 / (fan_in + fan_out)), biases zero, W[0] zero.  Deterministic
/// per seed.
NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed);

double forward(const NetworkParams& params, const Eigen::VectorXd& x);

/// K_NN(x) = grad_x f(x) by reverse accumulation.  At activation kinks the
/// derivative takes the leak branch.
Eigen::VectorXd gain(const NetworkParams& params, const Eigen::VectorXd& x);

struct GainEvaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
};
GainEvaluation evaluate_with_gradient(const NetworkParams& params,
                                      const Eigen::VectorXd& x);

/// Gradient (or Adam moment) container congruent to NetworkParams.
struct ParamGrad {
  std::vector<Eigen::MatrixXd> W, A;
  std::vector<Eigen::VectorXd> b;

  static ParamGrad zeros_like(const NetworkParams& params);
  void set_zero();
  void add(const ParamGrad& other);
  void scale(double s);
  bool all_finite() const;
  double squared_norm() const;
};

struct LossGrad {
  double loss = 0.0;
  ParamGrad grad;
};

/// Empirical objective over a batch of rows:
///   (1/M) sum_i [ 1/2 |grad_x f(X_i)|^2 - f(X_i) (h_i - h_hat) ]
/// with the exact parameter gradient, including the derivative of grad_x f
/// w.r.t. the parameters (reverse pass for grad_x f, then a forward tangent
/// seeded by it through the differentiated graph).  h_hat is supplied by the
/// caller (full-ensemble mean during training).
/// Throws numeric_error naming the layer if an intermediate is non-finite.
LossGrad loss_and_grad(const NetworkParams& params, const Eigen::MatrixXd& batch,
                       const Eigen::VectorXd& h_values, double h_hat,
                       const Exec& exec = {});

/// Serial reference implementation (kept for kernel testing/benchmarks).
LossGrad loss_and_grad_serial(const NetworkParams& params,
                              const Eigen::MatrixXd& batch,
                              const Eigen::VectorXd& h_values, double h_hat);

/// The two loss terms and their gradients separately; used by the
/// validation suite to exercise the double-backprop term in isolation.
struct LossGradParts {
  double quadratic_loss = 0.0;  // (1/M) sum 1/2 |grad_x f|^2
  double linear_loss = 0.0;     // (1/M) sum -f (h - h_hat)
  ParamGrad quadratic_grad;
  ParamGrad linear_grad;
};
LossGradParts loss_and_grad_parts(const NetworkParams& params,
                                  const Eigen::MatrixXd& batch,
                                  const Eigen::VectorXd& h_values, double h_hat);

// JSON layout: object with input_dim, alpha, widths, and one
// {"W": {rows, cols, data-row-major}, "A": ..., "b": [...]} entry per
// transition.  Round-trips bit-exactly for finite values.
std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);
void save_params(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace fpf
