#include "fpf/galerkin.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "fpf/errors.hpp"

namespace fpf {

namespace {

void enumerate_exponents(int dim, int remaining, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == dim - 1) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current.push_back(e);
    enumerate_exponents(dim, remaining - e, current, out);
    current.pop_back();
  }
}

double monomial(const std::vector<int>& expo, const Eigen::VectorXd& x) {
  double v = 1.0;
  for (std::size_t k = 0; k < expo.size(); ++k) {
    for (int e = 0; e < expo[k]; ++e) v *= x[static_cast<Eigen::Index>(k)];
  }
  return v;
}

Eigen::VectorXd monomial_grad(const std::vector<int>& expo,
                              const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const int ek = expo[static_cast<std::size_t>(k)];
    if (ek == 0) continue;
    double v = static_cast<double>(ek);
    for (std::size_t j = 0; j < expo.size(); ++j) {
      const int e = expo[j] - (static_cast<Eigen::Index>(j) == k ? 1 : 0);
      for (int r = 0; r < e; ++r) v *= x[static_cast<Eigen::Index>(j)];
    }
    g[k] = v;
  }
  return g;
}

}  // namespace

std::vector<std::vector<int>> monomial_basis(int dim, int degree) {
  if (dim < 1) throw config_error("monomial_basis: dim must be >= 1");
  if (degree < 1) throw config_error("monomial_basis: degree must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  for (int total = 1; total <= degree; ++total) {
    enumerate_exponents(dim, total, current, out);
  }
  return out;
}

GalerkinModel galerkin_fit(const Ensemble& ensemble, const ObservationFn& h,
                           int degree) {
  const int d = static_cast<int>(ensemble.dim());
  GalerkinModel model;
  model.dim = d;
  model.degree = degree;
  model.exponents = monomial_basis(d, degree);
  const Eigen::Index B = static_cast<Eigen::Index>(model.exponents.size());
  const Eigen::Index N = ensemble.size();
  if (N < B) {
    throw fit_error("galerkin_fit: need at least as many particles as basis functions");
  }

  const Eigen::VectorXd h_all = h.values(ensemble);
  const double h_hat = h_all.mean();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(B, B);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(B);
  Eigen::MatrixXd grads(B, d);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::VectorXd x = ensemble.positions.row(i).transpose();
    for (Eigen::Index j = 0; j < B; ++j) {
      grads.row(j) = monomial_grad(model.exponents[static_cast<std::size_t>(j)], x).transpose();
      rhs[j] += (h_all[i] - h_hat) * monomial(model.exponents[static_cast<std::size_t>(j)], x);
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(grads, 1.0);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  gram /= static_cast<double>(N);
  rhs /= static_cast<double>(N);

  auto try_solve = [&](const Eigen::MatrixXd& a) -> std::pair<bool, Eigen::VectorXd> {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) return {false, Eigen::VectorXd()};
    Eigen::VectorXd c = ldlt.solve(rhs);
    if (!c.allFinite()) return {false, Eigen::VectorXd()};
    return {true, std::move(c)};
  };

  const double rhs_norm = std::max(rhs.norm(), 1e-300);
  auto [ok, coeffs] = try_solve(gram);
  double residual = ok ? (gram * coeffs - rhs).norm() / rhs_norm : 1.0;
  if (!ok || residual > 1e-8) {
    const Eigen::MatrixXd ridged =
        gram + 1e-10 * Eigen::MatrixXd::Identity(B, B);
    auto [ok2, coeffs2] = try_solve(ridged);
    if (!ok2) {
      throw fit_error("galerkin_fit: Gram solve failed beyond the ridge fallback");
    }
    const double residual2 = (gram * coeffs2 - rhs).norm() / rhs_norm;
    if (!std::isfinite(residual2)) {
      throw fit_error("galerkin_fit: ridge solve produced a non-finite residual");
    }
    model.ridge_fallback_used = true;
    coeffs = std::move(coeffs2);
    residual = residual2;
  }
  model.coeffs = std::move(coeffs);
  model.normal_residual = residual;
  return model;
}

double galerkin_potential(const GalerkinModel& model, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (std::size_t j = 0; j < model.exponents.size(); ++j) {
    v += model.coeffs[static_cast<Eigen::Index>(j)] * monomial(model.exponents[j], x);
  }
  return v;
}

Eigen::VectorXd galerkin_gain(const GalerkinModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (std::size_t j = 0; j < model.exponents.size(); ++j) {
    g += model.coeffs[static_cast<Eigen::Index>(j)] * monomial_grad(model.exponents[j], x);
  }
  return g;
}

}  // namespace fpf
