#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdnet/grid.hpp"
#include "pdnet/tensor.hpp"

namespace pdnet {

struct ConvLayer {
  Tensor weight;  // (k, k, Cin, Cout)
  Tensor bias;    // (Cout)
};

// Three strided conv layers 2 -> 8 -> 32 -> 64, 4x4 kernels, stride 2,
// periodic pad 1, tanh after each; n x n x 2 input becomes n/8 x n/8 x 64.
struct EncoderParams {
  std::array<ConvLayer, 3> conv;
};

// Gated recurrence over the latent grid. All convs are 3x3, stride 1,
// periodic pad 1 over 64-channel states; the peephole weights w_ci/w_cf act
// elementwise and share the state shape (n/8, n/8, 64).
struct ConvLstmParams {
  Tensor w_xi, w_hi, w_xf, w_hf, w_xc, w_hc, w_xo, w_ho;
  Tensor w_ci, w_cf;
  Tensor b_i, b_f, b_c;
  // Used only when ModelOptions::output_gate_bias is set; the literal form
  // of the output gate has neither bias nor peephole.
  Tensor b_o;
  Tensor alpha;  // rank-0, parameter of the periodic cell activation
};

// Three conv layers 64 -> 64, 16 -> 32, 8 -> 8 (3x3, stride 1, periodic
// pad 1, tanh), each followed by pixel_shuffle(r=2); channel arithmetic
// lands at n x n x 2.
struct DecoderParams {
  std::array<ConvLayer, 3> conv;
};

struct ModelOptions {
  // Replace the final decoder tanh with identity so the predicted rate is
  // unbounded.
  bool final_linear = false;
  // Add a bias term to the output gate (conventional ConvLSTM form).
  bool output_gate_bias = false;

  bool operator==(const ModelOptions&) const = default;
};

struct ModelParams {
  EncoderParams encoder;
  ConvLstmParams lstm;
  DecoderParams decoder;
  double dt = 0.0;
  int grid_n = 0;
  ModelOptions options;

  // Stable (name, tensor) enumeration shared by the optimizer and the
  // checkpoint format.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<std::pair<std::string, const Tensor*>> named_params() const;

  // Copy whose parameter tensors are watched on the tape (storage shared
  // with this instance, so optimizer updates through either copy agree).
  ModelParams tracked(Tape& tape) const;
};

// Glorot-uniform conv weights, zero biases and peepholes, alpha uniform in
// [-2pi, 2pi] resampled until |alpha| >= 0.1; deterministic per seed.
// n must be divisible by 8.
ModelParams init_params(std::uint64_t seed, int n, double dt,
                        ModelOptions options = {});

// Encoder stack on an (n, n, 2) tensor -> (n/8, n/8, 64).
Tensor encoder_forward(const Tensor& x, const EncoderParams& enc);
// Field front-end returning the split latents (channels [0,32) and [32,64)).
std::pair<Tensor, Tensor> encode(const Field& field, const ModelParams& params);

// One gated update; returns (h, c).
std::pair<Tensor, Tensor> convlstm_step(const Tensor& x, const Tensor& h_prev,
                                        const Tensor& c_prev, const ConvLstmParams& lstm,
                                        const ModelOptions& options);

// Decoder stack (n/8, n/8, 64) -> (n, n, 2) rate tensor.
Tensor decode_rate(const Tensor& h, const DecoderParams& dec, const ModelOptions& options);
// Field front-end for the rate field (units: field per second).
Field decode(const Tensor& h, const ModelParams& params, const Grid& grid, double t = 0.0);

// Zero initial hidden/cell state for grid side n.
Tensor zero_state(int n);

struct StepOutput {
  Tensor u;  // (n, n, 2) next state
  Tensor h, c;
  Tensor latent_u, latent_v;  // encoder latents of the *input* state
};

// Forward-Euler integrator step: encode, recur, decode,
// u_next = u_prev + dt * rate. Tensor form used by training.
StepOutput network_step(const Tensor& u_prev, const Tensor& h_prev, const Tensor& c_prev,
                        const ModelParams& params);
// Field form; timestamp advances by params.dt.
std::tuple<Field, Tensor, Tensor> step(const Field& u_prev, const Tensor& h_prev,
                                       const Tensor& c_prev, const ModelParams& params);

struct Rollout {
  FieldSequence seq;                   // steps + 1 fields, ic first
  std::vector<Tensor> latent_u, latent_v;  // one per applied step
};

// Autoregressive rollout from zero hidden state. Raises NumericError naming
// the step index if the state leaves the finite range.
Rollout rollout(const Field& ic, int steps, const ModelParams& params);

// Checkpoint container, magic "PDCKP1": u32 tensor count, then per tensor a
// u16 name length, the UTF-8 name, u32 rank, rank u32 dims, and the f64
// payload. Parameters use their named_params() names; dt, grid side, and the
// option flags ride along as rank-0 metadata tensors (meta.dt, meta.grid_n,
// meta.final_linear, meta.output_gate_bias).
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace pdnet
