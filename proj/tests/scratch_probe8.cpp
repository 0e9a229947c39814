// Throwaway probe: dimension sweep + runtime scaling drivers.
#include <chrono>
#include <cstdio>

#include "fpf/experiments.hpp"

using namespace fpf;
using clk = std::chrono::steady_clock;

int main(int argc, char**) {
  auto t0 = clk::now();
  if (argc < 2) {
    DimensionSweepConfig dc;
    dc.simulations = 20;
    dc.seed = 0;
    const ExperimentReport rep = dimension_sweep(dc);
    const MetricTable* t = rep.find_table("mse_vs_dimension");
    for (const auto& row : t->rows) {
      std::printf("d=%2.0f neural %.4f dm %.4f (eps %.2f)\n", row[0], row[1],
                  row[2], row[3]);
    }
    double nmin = 1e300, nmax = 0;
    for (const auto& row : t->rows) {
      nmin = std::min(nmin, row[1]);
      nmax = std::max(nmax, row[1]);
    }
    std::printf("neural spread max/min = %.2f\n", nmax / nmin);
    std::printf("dm ratio d10/d1 = %.2f  neural ratio = %.2f\n",
                t->rows[3][2] / t->rows[0][2], t->rows[3][1] / t->rows[0][1]);
    std::printf("sweep took %.1fs\n",
                std::chrono::duration<double>(clk::now() - t0).count());
  } else {
    ScalingConfig sc;
    sc.seed = 0;
    const ExperimentReport rep = runtime_scaling(sc);
    const MetricTable* t = rep.find_table("timings");
    for (std::size_t r = 0; r < t->rows.size(); ++r) {
      std::printf("%-14s N=%5.0f median %.4fs [%.4f, %.4f]\n",
                  t->row_labels[r].c_str(), t->rows[r][0], t->rows[r][1],
                  t->rows[r][2], t->rows[r][3]);
    }
    const MetricTable* s = rep.find_table("slopes");
    for (std::size_t r = 0; r < s->rows.size(); ++r) {
      std::printf("%-14s slope %.3f\n", s->row_labels[r].c_str(), s->rows[r][0]);
    }
    std::printf("scaling took %.1fs\n",
                std::chrono::duration<double>(clk::now() - t0).count());
  }
  return 0;
}
