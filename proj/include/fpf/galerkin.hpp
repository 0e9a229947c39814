#pragma once

#include <Eigen/Core>
#include <vector>

#include "fpf/density.hpp"

namespace fpf {

/// Linear gain approximation on a monomial basis: potential
/// phi(x) = sum_j c_j psi_j(x) with psi_j all monomials of total degree
/// 1..p (constants excluded).
struct GalerkinModel {
  int dim = 1;
  int degree = 5;
  std::vector<std::vector<int>> exponents;  // multi-index per basis function
  Eigen::VectorXd coeffs;
  bool ridge_fallback_used = false;
  double normal_residual = 0.0;  // ||A c - b|| / ||b||
};

/// Multi-indices of all monomials with total degree in [1, degree],
/// enumerated in graded lexicographic order.
std::vector<std::vector<int>> monomial_basis(int dim, int degree);

/// Solves the normal equations of the empirical objective,
///   [(1/N) sum_i <grad psi_j, grad psi_k>(X_i)] c
///     = [(1/N) sum_i (h_i - h_hat) psi_j(X_i)],
/// by a symmetric LDLT solve with a +1e-10 I ridge retry.
/// Requires N >= basis size; throws fit_error otherwise or when the ridge
/// retry still fails.
GalerkinModel galerkin_fit(const Ensemble& ensemble, const ObservationFn& h,
                           int degree);

double galerkin_potential(const GalerkinModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd galerkin_gain(const GalerkinModel& model, const Eigen::VectorXd& x);

}  // namespace fpf
