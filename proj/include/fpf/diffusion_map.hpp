#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "fpf/density.hpp"
#include "fpf/parallel.hpp"

namespace fpf {

/// Kernel Markov approximation of the weighted-Laplacian semigroup fitted
/// to one ensemble.  Construction: Gaussian kernel
/// g_ij = exp(-|X_i - X_j|^2 / (4 eps)), symmetric normalization
/// k_ij = g_ij / sqrt(s_i s_j) with s_i = sum_l g_il, then row
/// normalization to the Markov matrix T.  The potential solves the fixed
/// point Phi = T Phi + eps (h - h_hat) by iteration from zero with a mean
/// subtraction each sweep.
struct DiffusionMapModel {
  double epsilon = 0.1;
  Eigen::MatrixXd anchors;          // fitted particle positions, N x d
  Eigen::MatrixXd markov;           // T, row-stochastic N x N
  Eigen::VectorXd potential;        // Phi
  Eigen::VectorXd h_values;         // h at the anchors
  Eigen::VectorXd kernel_row_sums;  // s_i, needed for out-of-sample rows
  std::int64_t sweeps = 0;
  double residual = 0.0;  // sup-norm fixed-point residual of the returned Phi
};

/// Fits the model; throws fit_error when the fixed point has not converged
/// within max_iter (the message carries the residual).
DiffusionMapModel dm_fit(const Ensemble& ensemble, const ObservationFn& h,
                         double epsilon, std::int64_t max_iter = 10000,
                         double tol = 1e-9, const Exec& exec = {});

/// One fixed-point solve: Phi <- T Phi + rhs, mean-subtracted each sweep,
/// stopping when the sup-change drops below tol or after max_iter sweeps.
/// Returns the final iterate; optionally reports sweeps and the residual
/// sup|Phi - center(T Phi + rhs)|.
Eigen::VectorXd dm_fixed_point(const Eigen::MatrixXd& markov,
                               const Eigen::VectorXd& rhs,
                               std::int64_t max_iter, double tol,
                               std::int64_t* sweeps = nullptr,
                               double* residual = nullptr,
                               const Exec& exec = {});

/// Gain at fitted particle i:
///   K_i = 1/(2 eps) sum_j T_ij (Phi_j + eps h_j) (X_j - sum_l T_il X_l).
Eigen::VectorXd dm_gain(const DiffusionMapModel& model, Eigen::Index i);

/// Gain at an arbitrary point via the kernel extension (a fresh T-row
/// against the fitted particles); coincides with dm_gain at the anchors.
Eigen::VectorXd dm_gain_at(const DiffusionMapModel& model,
                           const Eigen::VectorXd& x);

// Serial reference kernels (kept for testing and benchmarks).
Eigen::MatrixXd dm_kernel_serial(const Eigen::MatrixXd& positions, double epsilon);
Eigen::MatrixXd dm_kernel(const Eigen::MatrixXd& positions, double epsilon,
                          const Exec& exec);

}  // namespace fpf
