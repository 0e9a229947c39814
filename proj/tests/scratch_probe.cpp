// Throwaway probe used during development; not part of the test suite.
#include <cstdio>
#include <random>

#include "fpf/density.hpp"
#include "fpf/diffusion_map.hpp"
#include "fpf/galerkin.hpp"
#include "fpf/network.hpp"
#include "fpf/train.hpp"
#include "fpf/validate.hpp"

using namespace fpf;

int main() {
  // 1. quick FD sanity for gain + parameter gradient
  {
    NetworkArch arch{4, 16, 0.3, 3};
    NetworkParams p = init_params(arch, 3);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(3);
    for (int k = 0; k < 3; ++k) x[k] = normal(rng);
    Eigen::VectorXd g = gain(p, x);
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += 1e-5;
      xm[k] -= 1e-5;
      double fd = (forward(p, xp) - forward(p, xm)) / 2e-5;
      worst = std::max(worst, std::abs(fd - g[k]) / std::max(1e-8, std::abs(fd)));
    }
    std::printf("input-grad FD worst rel: %.3e\n", worst);
  }
  {
    NetworkArch arch{3, 8, 0.3, 2};
    NetworkParams p = init_params(arch, 5);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd batch(16, 2);
    Eigen::VectorXd hv(16);
    for (int i = 0; i < 16; ++i) {
      batch(i, 0) = normal(rng);
      batch(i, 1) = normal(rng);
      hv[i] = batch(i, 0) + 0.3 * batch(i, 1) * batch(i, 1);
    }
    double hh = hv.mean();
    LossGrad lg = loss_and_grad_serial(p, batch, hv, hh);
    double worst = 0;
    for (int l = 0; l < p.layer_count(); ++l) {
      for (int kind = 0; kind < 3; ++kind) {
        if (kind == 0 && l == 0) continue;
        Eigen::MatrixXd* mat = kind == 0 ? &p.W[l] : (kind == 1 ? &p.A[l] : nullptr);
        Eigen::Index rows = kind == 2 ? p.b[l].size() : mat->rows();
        Eigen::Index cols = kind == 2 ? 1 : mat->cols();
        for (Eigen::Index i = 0; i < rows; ++i) {
          for (Eigen::Index j = 0; j < cols; ++j) {
            double* theta = kind == 2 ? &p.b[l][i] : &(*mat)(i, j);
            const double saved = *theta;
            *theta = saved + 1e-6;
            double lp = loss_and_grad_serial(p, batch, hv, hh).loss;
            *theta = saved - 1e-6;
            double lm = loss_and_grad_serial(p, batch, hv, hh).loss;
            *theta = saved;
            double fd = (lp - lm) / 2e-6;
            double an = kind == 0 ? lg.grad.W[l](i, j)
                                  : (kind == 1 ? lg.grad.A[l](i, j) : lg.grad.b[l][i]);
            worst = std::max(worst, std::abs(fd - an) / std::max(1e-6, std::abs(fd)));
          }
        }
      }
    }
    std::printf("param-grad FD worst rel: %.3e  (loss %.6f)\n", worst, lg.loss);
  }

  // 2. exact gain fixtures: bimodal sigma^2 = 0.2, h(x) = x, grid on [-4, 4]
  {
    const DensityModel model = DensityModel::bimodal(0.2);
    const ObservationFn h = ObservationFn::coordinate(0);
    const std::size_t n = 100001;
    const double lo = -4.0, hi = 4.0;
    // independent brute-force tabulation (plain trapezoid, no library calls)
    std::vector<double> xs(n), rho(n);
    const double dx = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = lo + dx * double(i);
      rho[i] = model.pdf1(xs[i]);
    }
    double mass = 0, hbar = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      mass += 0.5 * dx * (rho[i] + rho[i + 1]);
      hbar += 0.5 * dx * (rho[i] * xs[i] + rho[i + 1] * xs[i + 1]);
    }
    hbar /= mass;
    std::printf("bimodal h_hat on [-4,4]: %.12e (mass %.12f)\n", hbar, mass);
    double cum = 0;
    std::printf("frozen (x, K) pairs:\n");
    std::size_t want = 0;
    const double targets[] = {-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
    for (std::size_t i = 1; i < n; ++i) {
      cum += 0.5 * dx * (rho[i - 1] * (xs[i - 1] - hbar) + rho[i] * (xs[i] - hbar));
      while (want < 9 && xs[i] >= targets[want] - 1e-12) {
        std::printf("  {%.1f, %.15e},\n", targets[want], -cum / rho[i]);
        ++want;
      }
    }
    // cross-check against the library oracles
    const TabulatedGain1D tab = TabulatedGain1D::for_model(model, h);
    std::printf("library tab K(0)=%.15e K(1)=%.15e adaptive K(0)=%.15e\n",
                tab(0.0), tab(1.0), exact_gain_1d(model, h, 0.0));
    std::printf("gaussian const-gain check: K(0.7) for N(0.3, 0.5), h=x: %.12f\n",
                exact_gain_1d(DensityModel::gaussian(0.3, 0.5), h, 0.7));
  }

  // 3. homotopy fixtures: N(0,1) prior, l = (|x|-2)^2, t = 1, grid [-6, 6]
  {
    const DensityModel prior = DensityModel::gaussian(0.0, 1.0);
    const ObservationFn l = ObservationFn::quadratic_well();
    const std::size_t n = 100001;
    const double lo = -6.0, hi = 6.0;
    const double dx = (hi - lo) / double(n - 1);
    double z = 0;
    auto raw = [&](double x) { return prior.pdf1(x) * std::exp(-l(x)); };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = lo + dx * double(i);
      z += 0.5 * dx * (raw(a) + raw(a + dx));
    }
    std::printf("homotopy t=1 normalizer on [-6,6]: %.15e\n", z);
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      std::printf("  rho1(%.1f) = %.15e\n", x, raw(x) / z);
    }
    double epsi = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = lo + dx * double(i);
      auto f = [&](double u) { return raw(u) * (u > 0 ? u : 0.0); };
      epsi += 0.5 * dx * (f(a) + f(a + dx));
    }
    std::printf("E[x 1_{x>0}] at t=1: %.15e\n", epsi / z);
    const HomotopyDensity rho1(prior, l, 1.0);
    std::printf("library: Z=%.15e rho1(0)=%.15e E=%.15e\n", rho1.normalizer(),
                rho1.pdf(0.0),
                expectation(rho1, [](double x) { return x > 0 ? x : 0.0; }));
  }
  return 0;
}
