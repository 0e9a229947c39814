// Throwaway probe: overfitting experiment behavior at the pinned config.
#include <cstdio>

#include "fpf/experiments.hpp"

using namespace fpf;

int main() {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    OverfitConfig oc;
    oc.seed = seed;
    const ExperimentReport rep = overfit_experiment(oc);
    const MetricTable* full = rep.find_table("full_batch_trace");
    const MetricTable* summary = rep.find_table("overfit_summary");
    std::printf("seed %llu\n", (unsigned long long)seed);
    for (const auto& t : {0, 1}) {
      const auto& row = summary->rows[t];
      std::printf(
          "  %s: min test %.4f @ iter %.0f, final test %.4f, final train %.4f, "
          "gap %.4f\n",
          summary->row_labels[t].c_str(), row[0], row[1], row[2], row[3], row[4]);
    }
    // print a sparse view of the full-batch test loss curve
    for (std::size_t i = 0; i < full->rows.size(); i += 10) {
      std::printf("    it %6.0f train %.4f test %.4f\n", full->rows[i][0],
                  full->rows[i][1], full->rows[i][2]);
    }
  }
  return 0;
}
