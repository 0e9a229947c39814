// Throwaway probe: energy scale of the exact gain + training convergence.
#include <cstdio>

#include "fpf/density.hpp"
#include "fpf/train.hpp"

using namespace fpf;

int main() {
  const DensityModel model = DensityModel::bimodal(0.2);
  const ObservationFn h = ObservationFn::coordinate(0);
  const TabulatedGain1D exact = TabulatedGain1D::for_model(model, h);
  const double lo = model.support_lo(), hi = model.support_hi();

  // den = int K^2 rho, J* = -den/2
  const std::size_t n = 200001;
  const double dx = (hi - lo) / double(n - 1);
  double den = 0, mass = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto f = [&](double x) { return exact(x) * exact(x) * model.pdf1(x); };
    const double a = lo + dx * double(i);
    den += 0.5 * dx * (f(a) + f(a + dx));
    mass += 0.5 * dx * (model.pdf1(a) + model.pdf1(a + dx));
  }
  std::printf("int K^2 rho = %.6f  (mass %.6f)  J* = %.6f\n", den, den / -2.0, mass);

  // where does the energy live? decompose into |x|<0.5 vs rest
  double spike = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = lo + dx * double(i);
    if (std::abs(a) < 0.5) {
      auto f = [&](double x) { return exact(x) * exact(x) * model.pdf1(x); };
      spike += 0.5 * dx * (f(a) + f(a + dx));
    }
  }
  std::printf("energy in |x|<0.5: %.6f of %.6f\n", spike, den);

  // long training run: does the loss approach J*?
  const Ensemble ens = model.sample(100, derive_seed(0, 77));
  // empirical J* on THIS ensemble with the exact potential (the empirical
  // minimum over all functions is unbounded, but J_hat(phi0) is the
  // natural reference)
  const double j_phi0 = empirical_objective(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g[0] = exact(x[0]);
        return std::make_pair(exact.potential(x[0]), g);
      },
      ens, h);
  std::printf("empirical J(phi0) on N=100 ensemble: %.6f\n", j_phi0);

  TrainConfig cfg;
  cfg.seed = 0;
  cfg.iterations = 100000;
  cfg.log_every = 10000;
  const TrainResult r = train_gain(ens, h, cfg);
  for (std::size_t i = 0; i < r.trace.iterations.size(); ++i) {
    std::printf("iter %6lld  train loss %.6f\n", (long long)r.trace.iterations[i],
                r.trace.train_loss[i]);
  }

  // rel L2 of the final long-trained network
  double num = 0, dsum = 0;
  for (std::size_t i = 0; i < n; i += 10) {
    const double x = lo + dx * double(i);
    const double w = model.pdf1(x);
    Eigen::VectorXd p(1);
    p[0] = x;
    const double k = gain(r.params, p)[0];
    num += w * (k - exact(x)) * (k - exact(x));
    dsum += w * exact(x) * exact(x);
  }
  std::printf("after 1e5 iters: rel L2 err %.4f\n", std::sqrt(num / dsum));
  return 0;
}
