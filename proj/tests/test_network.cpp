#include <doctest.h>

#include <cmath>
#include <random>

#include "fpf/errors.hpp"
#include "fpf/network.hpp"

using namespace fpf;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

// smallest |preactivation| along the forward recursion
double min_abs_z(const NetworkParams& p, const Eigen::VectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.W[0].cols());
  const int L = p.layer_count();
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd z = (l == 0) ? (p.A[0] * x + p.b[0]).eval()
                                 : (p.W[l] * h + p.A[l] * x + p.b[l]).eval();
    best = std::min(best, z.cwiseAbs().minCoeff());
    if (l == 0) {
      h = z.unaryExpr([&](double v) {
        const double u = v > 0 ? v : p.alpha * v;
        return u * u;
      });
    } else if (l < L - 1) {
      h = z.unaryExpr([&](double v) { return v > 0 ? v : p.alpha * v; });
    }
  }
  return best;
}

}  // namespace

TEST_CASE("init is deterministic per seed and respects the scale bound") {
  const NetworkArch arch{4, 32, 0.3, 1};
  const NetworkParams a = init_params(arch, 0);
  const NetworkParams b = init_params(arch, 0);
  const NetworkParams c = init_params(arch, 1);
  CHECK(params_to_json(a) == params_to_json(b));
  CHECK(params_to_json(a) != params_to_json(c));

  for (int l = 0; l < a.layer_count(); ++l) {
    const double w_bound = std::sqrt(6.0 / (a.W[l].cols() + a.W[l].rows()));
    const double a_bound = std::sqrt(6.0 / (1 + a.A[l].rows()));
    CHECK(a.W[l].cwiseAbs().maxCoeff() <= (l == 0 ? 0.0 : w_bound));
    CHECK(a.A[l].cwiseAbs().maxCoeff() <= a_bound);
    CHECK(a.b[l].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("parameter count matches a hand enumeration for L=2, m=3, d=2") {
  // transitions: l=0 (A0 3x2 + b0 3, W0 frozen) and l=1 (W1 1x3 + A1 1x2 + b1 1)
  const std::int64_t hand = (3 * 2 + 3) + (1 * 3 + 1 * 2 + 1);
  CHECK(parameter_count(NetworkArch{2, 3, 0.3, 2}) == hand);
  CHECK(init_params(NetworkArch{2, 3, 0.3, 2}, 0).parameter_count() == hand);
}

TEST_CASE("three reference architectures have near-equal parameter counts") {
  const std::int64_t c1 = parameter_count(NetworkArch{3, 64, 0.3, 1});
  const std::int64_t c2 = parameter_count(NetworkArch{6, 32, 0.3, 1});
  const std::int64_t c3 = parameter_count(NetworkArch{18, 16, 0.3, 1});
  CHECK(c1 == 4418);
  CHECK(c2 == 4450);
  CHECK(c3 == 4658);
}

TEST_CASE("zero network evaluates to zero with zero gain") {
  NetworkParams p = init_params({4, 8, 0.3, 2}, 3);
  for (auto& m : p.W) m.setZero();
  for (auto& m : p.A) m.setZero();
  for (auto& v : p.b) v.setZero();
  Eigen::VectorXd x(2);
  x << 0.3, -1.2;
  CHECK(forward(p, x) == 0.0);
  CHECK(gain(p, x).norm() == 0.0);
}

TEST_CASE("hand-built weights realize f(x) = c x through the squared activation") {
  // d=1, L=2, width 2: h1 = ((x+1)^2, (x-1)^2) for x > 1, and
  // W1 = (c/4, -c/4) gives W1 h1 = c x exactly on that region.
  const double c = 0.8;
  NetworkParams p;
  p.input_dim = 1;
  p.alpha = 0.3;
  p.W = {Eigen::MatrixXd::Zero(2, 1), (Eigen::MatrixXd(1, 2) << c / 4, -c / 4).finished()};
  p.A = {(Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished(), Eigen::MatrixXd::Zero(1, 1)};
  p.b = {(Eigen::VectorXd(2) << 1.0, -1.0).finished(), Eigen::VectorXd::Zero(1)};
  for (double x : {1.5, 2.0, 3.0, 7.0}) {
    CHECK(forward(p, vec1(x)) == doctest::Approx(c * x).epsilon(1e-12));
    CHECK(gain(p, vec1(x))[0] == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("forward is Lipschitz on sampled pairs") {
  const NetworkParams p = init_params({4, 16, 0.3, 2}, 9);
  // crude Lipschitz bound: product over layers of (|W| + |A|) operator norms,
  // with the first-layer square bounded on |x| <= 3
  double lip = 0.0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(2), d(2);
    x << u(rng), u(rng);
    d << u(rng), u(rng);
    d *= 1e-3 / d.norm();
    const double df = std::abs(forward(p, x + d) - forward(p, x));
    lip = std::max(lip, df / d.norm());
  }
  // gradient magnitude over the sampled box bounds the observed ratios
  double gmax = 0.0;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    gmax = std::max(gmax, gain(p, x).norm());
  }
  CHECK(lip <= gmax * 1.05 + 1e-9);
}

TEST_CASE("gain matches central finite differences at kink-free points") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 500 && checked < 100; ++trial) {
    const NetworkParams p = init_params({4, 16, 0.3, 3}, 100 + trial % 5);
    Eigen::VectorXd x(3);
    for (int k = 0; k < 3; ++k) x[k] = normal(rng);
    if (min_abs_z(p, x) < 1e-3) continue;
    ++checked;
    const Eigen::VectorXd g = gain(p, x);
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += 1e-5;
      xm[k] -= 1e-5;
      const double fd = (forward(p, xp) - forward(p, xm)) / 2e-5;
      CHECK(std::abs(fd - g[k]) / std::max(std::abs(fd), 1e-8) < 1e-5);
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("gain is exactly affine along kink-free segments") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 2000 && checked < 50; ++trial) {
    const NetworkParams p = init_params({4, 8, 0.3, 2}, 200 + trial % 7);
    Eigen::VectorXd a(2), dir(2);
    for (int k = 0; k < 2; ++k) {
      a[k] = normal(rng);
      dir[k] = normal(rng);
    }
    dir *= 5e-4 / dir.norm();
    // accept only segments whose endpoints and midpoint stay far from kinks
    // relative to the segment length
    if (min_abs_z(p, a) < 1e-2 || min_abs_z(p, a + dir) < 1e-2 ||
        min_abs_z(p, a + 2.0 * dir) < 1e-2) {
      continue;
    }
    ++checked;
    const Eigen::VectorXd g0 = gain(p, a);
    const Eigen::VectorXd g1 = gain(p, a + dir);
    const Eigen::VectorXd g2 = gain(p, a + 2.0 * dir);
    CHECK((g0 + g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(checked >= 20);
}

TEST_CASE("loss gradient matches finite differences over every parameter") {
  const NetworkArch arch{3, 8, 0.3, 2};
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
  const double hh = hv.mean();
  const LossGrad lg = loss_and_grad_serial(p, batch, hv, hh);

  auto fd_check = [&](double* theta, double analytic) {
    const double saved = *theta;
    *theta = saved + 1e-6;
    const double lp = loss_and_grad_serial(p, batch, hv, hh).loss;
    *theta = saved - 1e-6;
    const double lm = loss_and_grad_serial(p, batch, hv, hh).loss;
    *theta = saved;
    const double fd = (lp - lm) / 2e-6;
    CHECK(std::abs(fd - analytic) /
              std::max({std::abs(fd), std::abs(analytic), 1e-3}) <
          1e-4);
  };
  for (int l = 0; l < p.layer_count(); ++l) {
    if (l > 0) {
      for (Eigen::Index i = 0; i < p.W[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < p.W[l].cols(); ++j) {
          fd_check(&p.W[l](i, j), lg.grad.W[l](i, j));
        }
      }
    }
    for (Eigen::Index i = 0; i < p.A[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < p.A[l].cols(); ++j) {
        fd_check(&p.A[l](i, j), lg.grad.A[l](i, j));
      }
    }
    for (Eigen::Index i = 0; i < p.b[l].size(); ++i) {
      fd_check(&p.b[l][i], lg.grad.b[l][i]);
    }
  }
}

TEST_CASE("zero network loss and gradient structure") {
  NetworkParams p = init_params({3, 4, 0.3, 1}, 8);
  for (auto& m : p.W) m.setZero();
  for (auto& m : p.A) m.setZero();
  for (auto& v : p.b) v.setZero();
  Eigen::MatrixXd batch(5, 1);
  batch << -1.3, -0.2, 0.4, 1.1, 2.0;
  Eigen::VectorXd hv = batch.col(0);
  const double hh = hv.mean();

  const LossGradParts parts = loss_and_grad_parts(p, batch, hv, hh);
  CHECK(parts.quadratic_loss == 0.0);
  CHECK(parts.linear_loss == 0.0);
  CHECK(parts.quadratic_grad.squared_norm() == 0.0);
  // the full gradient reduces to -(1/M) sum (h - h_hat) dtheta f at zero weights
  const LossGrad lg = loss_and_grad_serial(p, batch, hv, hh);
  CHECK(lg.loss == 0.0);
  CHECK(std::sqrt(lg.grad.squared_norm()) ==
        doctest::Approx(std::sqrt(parts.linear_grad.squared_norm())));
}

TEST_CASE("loss and gradient are invariant to shifting h by a constant") {
  const NetworkParams p = init_params({4, 8, 0.3, 2}, 31);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd batch(12, 2);
  Eigen::VectorXd hv(12);
  for (int i = 0; i < 12; ++i) {
    batch(i, 0) = normal(rng);
    batch(i, 1) = normal(rng);
    hv[i] = std::sin(batch(i, 0));
  }
  const LossGrad a = loss_and_grad_serial(p, batch, hv, hv.mean());
  const Eigen::VectorXd shifted = hv.array() + 5.0;
  const LossGrad b = loss_and_grad_serial(p, batch, shifted, shifted.mean());
  CHECK(std::abs(a.loss - b.loss) < 1e-12);
  ParamGrad diff = a.grad;
  diff.scale(-1.0);
  diff.add(b.grad);
  CHECK(std::sqrt(diff.squared_norm()) < 1e-12);
}

TEST_CASE("non-finite intermediates raise a numeric error naming the layer") {
  NetworkParams p = init_params({3, 4, 0.3, 1}, 2);
  p.A[1](0, 0) = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd batch(1, 1);
  batch << 1.0;
  Eigen::VectorXd hv(1);
  hv << 1.0;
  CHECK_THROWS_WITH_AS(loss_and_grad_serial(p, batch, hv, 0.0),
                       doctest::Contains("layer 1"), numeric_error);
}

TEST_CASE("serialization round-trips bit-exactly") {
  const NetworkParams p = init_params({4, 32, 0.3, 3}, 77);
  const NetworkParams q = params_from_json(params_to_json(p));
  CHECK(q.input_dim == p.input_dim);
  CHECK(q.alpha == p.alpha);
  REQUIRE(q.layer_count() == p.layer_count());
  for (int l = 0; l < p.layer_count(); ++l) {
    CHECK(q.W[l] == p.W[l]);
    CHECK(q.A[l] == p.A[l]);
    CHECK(q.b[l] == p.b[l]);
  }
  CHECK(params_to_json(q) == params_to_json(p));
}

TEST_CASE("dimension mismatches are contract violations") {
  const NetworkParams p = init_params({3, 4, 0.3, 2}, 1);
  CHECK_THROWS_AS(forward(p, vec1(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(gain(p, vec1(1.0)), std::invalid_argument);
}
