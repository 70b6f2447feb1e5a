#pragma once

#include <cstdint>
#include <string>

#include "pdnet/grid.hpp"
#include "pdnet/network.hpp"
#include "pdnet/physics.hpp"
#include "pdnet/reference.hpp"
#include "pdnet/trainer.hpp"

namespace pdnet {

enum class RefScheme { pddo, fdm };

const char* ref_scheme_name(RefScheme s);
RefScheme ref_scheme_from_name(const std::string& name);

// One config file drives every subcommand. Strict JSON: a versioned schema,
// unknown keys rejected at every level, and a resolved dump that echoes all
// defaulted fields for reproducibility.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  PdeSpec pde;
  Grid grid{32, 0.0, 1.0};

  // filter block
  int filter_m = 2;
  double horizon_factor = 3.015;

  // lstm / decoder blocks
  ModelOptions options;

  // ic block
  std::uint64_t ic_seed = 0;
  double ic_amplitude = 0.2;

  // train block
  int train_steps = 100;
  double dt = 0.002;
  int epochs = 20;
  double lr0 = 1e-3;
  double lr_final = 1e-4;
  int bptt_window = 10;
  double w_out = 1.0;
  double w_lat = 1.0;
  std::uint64_t train_seed = 0;
  double grad_clip = 1.0;
  int checkpoint_every = 0;

  // ref block
  double dt_ref = 1e-4;
  int save_every = 20;
  double t_end = 0.2;
  RefScheme scheme = RefScheme::pddo;

  // eval block
  int extrapolation_steps = 50;

  void validate() const;
};

// Parses and validates; rejects unknown keys, wrong JSON types, and schema
// versions other than kSchemaVersion. All errors are ConfigError with the
// offending key path.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Full round-trippable JSON with every field present (defaults included).
std::string dump_resolved_config(const RunConfig& cfg);

// Assemble the per-module configs (checkpoint path/cadence for training is
// supplied by the caller since it names an output artifact).
TrainConfig make_train_config(const RunConfig& cfg);
SolveConfig make_solve_config(const RunConfig& cfg);

}  // namespace pdnet
