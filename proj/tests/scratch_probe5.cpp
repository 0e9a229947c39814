// Throwaway probe: two readings of "relative L2(rho) gain error" at the
// pinned configuration, across seeds.
#include <cstdio>

#include "fpf/density.hpp"
#include "fpf/train.hpp"

using namespace fpf;

int main() {
  const DensityModel model = DensityModel::bimodal(0.2);
  const ObservationFn h = ObservationFn::coordinate(0);
  const TabulatedGain1D exact = TabulatedGain1D::for_model(model, h);
  const double lo = model.support_lo(), hi = model.support_hi();

  auto metrics = [&](const NetworkParams& p) {
    double num = 0, den = 0, rel2 = 0, mass = 0;
    for (int i = 0; i <= 8000; ++i) {
      const double x = lo + (hi - lo) * i / 8000.0;
      const double w = model.pdf1(x);
      Eigen::VectorXd q(1);
      q[0] = x;
      const double k = gain(p, q)[0];
      const double ke = exact(x);
      num += w * (k - ke) * (k - ke);
      den += w * ke * ke;
      rel2 += w * (k - ke) * (k - ke) / (ke * ke);
      mass += w;
    }
    return std::make_pair(std::sqrt(num / den), std::sqrt(rel2 / mass));
  };

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Ensemble ens = model.sample(100, derive_seed(seed, 77));
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.log_every = 0;
    const TrainResult r = train_gain(ens, h, cfg);
    const auto [norm_ratio, pointwise] = metrics(r.params);
    std::printf("seed %llu: norm-ratio %.4f   pointwise-relative %.4f\n",
                (unsigned long long)seed, norm_ratio, pointwise);
  }
  return 0;
}
