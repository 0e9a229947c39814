#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fpf/config.hpp"
#include "fpf/density.hpp"
#include "fpf/gain_solver.hpp"

namespace fpf::cli {

/// Exit codes: 0 success, 2 configuration error, 3 numeric/fit error,
/// 1 anything else.  For `validate`, the number of failed properties
/// (capped at 125).
int run(int argc, char** argv);

struct GlobalOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  bool deterministic = false;
  int workers = 0;
};

// Config-to-domain builders shared by the subcommands.
DensityModel density_from_config(KeyValueConfig& cfg);
ObservationFn observation_from_config(KeyValueConfig& cfg,
                                      const std::string& fallback_kind);
TrainConfig train_from_config(KeyValueConfig& cfg, const GlobalOptions& opts);
SolverSpec solver_from_config(KeyValueConfig& cfg, const GlobalOptions& opts,
                              const std::string& fallback_kind);

int cmd_train_gain(const GlobalOptions& opts);
int cmd_experiment(const GlobalOptions& opts);
int cmd_validate(const GlobalOptions& opts);

}  // namespace fpf::cli
