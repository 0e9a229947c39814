// Serial reference vs OpenMP kernels on the hot paths: batch loss/gradient,
// full-ensemble loss, diffusion-map kernel assembly and fixed-point matvec.
// Run:  ./kernel_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "fpf/density.hpp"
#include "fpf/diffusion_map.hpp"
#include "fpf/network.hpp"
#include "fpf/train.hpp"

using namespace fpf;

namespace {

struct LossFixture {
  NetworkParams params = init_params({4, 32, 0.3, 2}, 7);
  Ensemble ensemble = DensityModel::product_bimodal_gauss(2, 0.2, 0.2).sample(4096, 7);
  Eigen::VectorXd h_values = ObservationFn::coordinate(0).values(ensemble);
  double h_hat = h_values.mean();
};

const LossFixture& loss_fixture() {
  static LossFixture f;
  return f;
}

void BM_BatchLossGrad(benchmark::State& state) {
  const auto& f = loss_fixture();
  const Exec exec{static_cast<int>(state.range(0))};
  for (auto _ : state) {
    auto out = loss_and_grad(f.params, f.ensemble.positions, f.h_values, f.h_hat, exec);
    benchmark::DoNotOptimize(out.loss);
  }
}
BENCHMARK(BM_BatchLossGrad)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_EvaluateLoss(benchmark::State& state) {
  const auto& f = loss_fixture();
  const Exec exec{static_cast<int>(state.range(0))};
  const ObservationFn h = ObservationFn::coordinate(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_loss(f.params, f.ensemble, h, exec));
  }
}
BENCHMARK(BM_EvaluateLoss)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_DmKernel(benchmark::State& state) {
  const Ensemble ens = DensityModel::bimodal(0.2).sample(2000, 7);
  const Exec exec{static_cast<int>(state.range(0))};
  for (auto _ : state) {
    auto g = dm_kernel(ens.positions, 0.1, exec);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_DmKernel)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_DmFixedPoint(benchmark::State& state) {
  const Ensemble ens = DensityModel::bimodal(0.2).sample(2000, 7);
  const ObservationFn h = ObservationFn::coordinate(0);
  const DiffusionMapModel model = dm_fit(ens, h, 0.1);
  const double h_hat = model.h_values.mean();
  const Eigen::VectorXd rhs =
      model.epsilon * (model.h_values.array() - h_hat).matrix();
  const Exec exec{static_cast<int>(state.range(0))};
  for (auto _ : state) {
    auto phi = dm_fixed_point(model.markov, rhs, 200, 0.0, nullptr, nullptr, exec);
    benchmark::DoNotOptimize(phi.data());
  }
}
BENCHMARK(BM_DmFixedPoint)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
