#include "fpf/diffusion_map.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "fpf/errors.hpp"

namespace fpf {

Eigen::MatrixXd dm_kernel_serial(const Eigen::MatrixXd& positions, double epsilon) {
  const Eigen::Index n = positions.rows();
  Eigen::MatrixXd g(n, n);
  const double inv = 1.0 / (4.0 * epsilon);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (positions.row(i) - positions.row(j)).squaredNorm();
      const double v = std::exp(-d2 * inv);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd dm_kernel(const Eigen::MatrixXd& positions, double epsilon,
                          const Exec& exec) {
  if (exec.serial()) return dm_kernel_serial(positions, epsilon);
  const Eigen::Index n = positions.rows();
  Eigen::MatrixXd g(n, n);
  const double inv = 1.0 / (4.0 * epsilon);
#pragma omp parallel for schedule(static) num_threads(exec.resolved())
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (positions.row(i) - positions.row(j)).squaredNorm();
      g(i, j) = std::exp(-d2 * inv);
    }
  }
  // mirror the upper triangle (disjoint writes above, deterministic)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) g(j, i) = g(i, j);
  }
  return g;
}

namespace {

void markov_apply(const Eigen::MatrixXd& markov, const Eigen::VectorXd& in,
                  Eigen::VectorXd& out, const Exec& exec) {
  if (exec.serial()) {
    out.noalias() = markov * in;
    return;
  }
#pragma omp parallel for schedule(static) num_threads(exec.resolved())
  for (Eigen::Index i = 0; i < markov.rows(); ++i) {
    out[i] = markov.row(i).dot(in);
  }
}

}  // namespace

Eigen::VectorXd dm_fixed_point(const Eigen::MatrixXd& markov,
                               const Eigen::VectorXd& rhs, std::int64_t max_iter,
                               double tol, std::int64_t* sweeps, double* residual,
                               const Exec& exec) {
  const Eigen::Index n = rhs.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  std::int64_t k = 0;
  double change = 0.0;
  for (; k < max_iter; ++k) {
    markov_apply(markov, phi, next, exec);
    next += rhs;
    next.array() -= next.mean();
    change = (next - phi).lpNorm<Eigen::Infinity>();
    phi.swap(next);
    if (change < tol) {
      ++k;
      break;
    }
  }
  if (sweeps) *sweeps = k;
  if (residual) {
    markov_apply(markov, phi, next, exec);
    next += rhs;
    next.array() -= next.mean();
    *residual = (phi - next).lpNorm<Eigen::Infinity>();
  }
  return phi;
}

DiffusionMapModel dm_fit(const Ensemble& ensemble, const ObservationFn& h,
                         double epsilon, std::int64_t max_iter, double tol,
                         const Exec& exec) {
  if (!(epsilon > 0.0)) throw config_error("dm_fit: epsilon must be > 0");

  DiffusionMapModel model;
  model.epsilon = epsilon;
  model.anchors = ensemble.positions;
  model.h_values = h.values(ensemble);

  Eigen::MatrixXd g = dm_kernel(ensemble.positions, epsilon, exec);
  model.kernel_row_sums = g.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = model.kernel_row_sums.array().rsqrt();
  // k_ij = g_ij / sqrt(s_i s_j), then rows normalized to T in place
  g = inv_sqrt.asDiagonal() * g * inv_sqrt.asDiagonal();
  const Eigen::VectorXd row_sums = g.rowwise().sum();
  g = row_sums.cwiseInverse().asDiagonal() * g;
  model.markov = std::move(g);

  const double h_hat = model.h_values.mean();
  const Eigen::VectorXd rhs = epsilon * (model.h_values.array() - h_hat).matrix();
  model.potential = dm_fixed_point(model.markov, rhs, max_iter, tol,
                                   &model.sweeps, &model.residual, exec);
  if (model.residual >= tol) {
    std::ostringstream os;
    os << "dm_fit: fixed point not converged after " << model.sweeps
       << " sweeps (residual " << model.residual << ", tol " << tol << ")";
    throw fit_error(os.str());
  }
  return model;
}

namespace {

Eigen::VectorXd gain_from_row(const DiffusionMapModel& model,
                              const Eigen::RowVectorXd& t_row) {
  const Eigen::RowVectorXd mean_pos = t_row * model.anchors;
  const Eigen::VectorXd weights =
      t_row.transpose().cwiseProduct(model.potential +
                                     model.epsilon * model.h_values);
  Eigen::VectorXd k =
      (model.anchors.rowwise() - mean_pos).transpose() * weights;
  k /= 2.0 * model.epsilon;
  return k;
}

}  // namespace

Eigen::VectorXd dm_gain(const DiffusionMapModel& model, Eigen::Index i) {
  if (i < 0 || i >= model.markov.rows()) {
    throw std::invalid_argument("dm_gain: particle index out of range");
  }
  return gain_from_row(model, model.markov.row(i));
}

Eigen::VectorXd dm_gain_at(const DiffusionMapModel& model,
                           const Eigen::VectorXd& x) {
  if (x.size() != model.anchors.cols()) {
    throw std::invalid_argument("dm_gain_at: dimension mismatch");
  }
  const Eigen::Index n = model.anchors.rows();
  Eigen::RowVectorXd g_row(n);
  const double inv = 1.0 / (4.0 * model.epsilon);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d2 = (model.anchors.row(j) - x.transpose()).squaredNorm();
    g_row[j] = std::exp(-d2 * inv);
  }
  const double s_x = g_row.sum();
  Eigen::RowVectorXd k_row =
      g_row.cwiseQuotient(model.kernel_row_sums.transpose().cwiseSqrt()) /
      std::sqrt(s_x);
  k_row /= k_row.sum();
  return gain_from_row(model, k_row);
}

}  // namespace fpf
