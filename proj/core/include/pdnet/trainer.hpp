#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdnet/grid.hpp"
#include "pdnet/network.hpp"
#include "pdnet/physics.hpp"

namespace pdnet {

struct TrainConfig {
  PdeSpec pde;
  Grid grid;
  int filter_m = 2;
  double horizon_factor = 3.015;

  int steps = 0;  // rollout length T per epoch
  double dt = 0.0;
  int epochs = 0;
  double lr0 = 1e-3;
  double lr_final = 1e-4;
  int bptt_window = 10;  // W: tape span; gradients sever at window boundaries
  double w_out = 1.0;
  double w_lat = 1.0;
  std::uint64_t seed = 0;
  double grad_clip = 1.0;  // global-norm ceiling; <= 0 disables

  ModelOptions options;

  // Checkpoint cadence: every `checkpoint_every` epochs the current
  // parameters overwrite `checkpoint_path`; 0 disables periodic writes.
  int checkpoint_every = 0;
  std::string checkpoint_path;

  // Diagnostic hook invoked after each window's optimizer update.
  std::function<void(const ModelParams& params, int epoch, int window, double loss)>
      on_window_end;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based, matching the CSV
  double loss_output = 0.0;
  double loss_latent = 0.0;
  double loss_total = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  bool aborted = false;
  std::string message;  // set when aborted
};

// Exponential decay from lr0 to lr_final across the epoch range; constant
// lr0 for a single-epoch run. epoch is 0-based.
double lr_schedule(int epoch, const TrainConfig& cfg);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m, v;  // aligned with named_params() order

  static AdamState init(const ModelParams& params);
};

// Standard bias-corrected Adam step over the named parameter list; grads
// must align with params.named_params(). Raises NumericError naming the
// parameter on a non-finite gradient.
void adam_update(ModelParams& params, const std::vector<std::vector<double>>& grads,
                 AdamState& state, double lr);

// Unsupervised training: per epoch, roll out T steps from the IC in windows
// of W steps; each window's tape spans that window only (state carries over
// detached), the combined output/latent residual loss is minimized by one
// Adam step per window, and per-epoch aggregate losses are appended to the
// history. A non-finite loss aborts the run, retaining the parameters from
// the last completed epoch. When w_lat = 0 the latent residual is still
// reported but evaluated outside the tape.
TrainResult train(const TrainConfig& cfg, const Field& ic);

// CSV with header epoch,loss_output,loss_latent,loss_total,lr.
void write_loss_history_csv(const std::vector<EpochStats>& history, const std::string& path);
std::vector<EpochStats> read_loss_history_csv(const std::string& path);

}  // namespace pdnet
