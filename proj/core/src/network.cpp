#include "pdnet/network.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <tuple>

#include "pdnet/ops.hpp"

namespace pdnet {

namespace {

constexpr int kEncoderCh[4] = {2, 8, 32, 64};
constexpr int kDecoderIn[3] = {64, 16, 8};
constexpr int kDecoderOut[3] = {64, 32, 8};
constexpr double kTwoPi = 6.283185307179586476925286766559;

Tensor glorot_conv(std::mt19937_64& rng, int k, int cin, int cout) {
  double limit = std::sqrt(6.0 / (k * k * cin + k * k * cout));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t({k, k, cin, cout});
  for (int i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

void require_latent_shape(const Tensor& t, const char* name) {
  if (t.rank() != 3 || t.shape()[2] != kEncoderCh[3] || t.shape()[0] != t.shape()[1])
    throw ShapeError(std::string(name) + " must be (n/8, n/8, 64), got " +
                     shape_str(t.shape()));
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (int i = 0; i < 3; ++i) {
    out.emplace_back("encoder.conv" + std::to_string(i) + ".weight", &encoder.conv[i].weight);
    out.emplace_back("encoder.conv" + std::to_string(i) + ".bias", &encoder.conv[i].bias);
  }
  out.emplace_back("lstm.w_xi", &lstm.w_xi);
  out.emplace_back("lstm.w_hi", &lstm.w_hi);
  out.emplace_back("lstm.w_xf", &lstm.w_xf);
  out.emplace_back("lstm.w_hf", &lstm.w_hf);
  out.emplace_back("lstm.w_xc", &lstm.w_xc);
  out.emplace_back("lstm.w_hc", &lstm.w_hc);
  out.emplace_back("lstm.w_xo", &lstm.w_xo);
  out.emplace_back("lstm.w_ho", &lstm.w_ho);
  out.emplace_back("lstm.w_ci", &lstm.w_ci);
  out.emplace_back("lstm.w_cf", &lstm.w_cf);
  out.emplace_back("lstm.b_i", &lstm.b_i);
  out.emplace_back("lstm.b_f", &lstm.b_f);
  out.emplace_back("lstm.b_c", &lstm.b_c);
  out.emplace_back("lstm.b_o", &lstm.b_o);
  out.emplace_back("lstm.alpha", &lstm.alpha);
  for (int i = 0; i < 3; ++i) {
    out.emplace_back("decoder.conv" + std::to_string(i) + ".weight", &decoder.conv[i].weight);
    out.emplace_back("decoder.conv" + std::to_string(i) + ".bias", &decoder.conv[i].bias);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named_params() const {
  auto mut = const_cast<ModelParams*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mut.size());
  for (auto& [name, t] : mut) out.emplace_back(name, t);
  return out;
}

ModelParams ModelParams::tracked(Tape& tape) const {
  ModelParams copy = *this;
  for (auto& [name, t] : copy.named_params()) *t = tape.watch(*t);
  return copy;
}

ModelParams init_params(std::uint64_t seed, int n, double dt, ModelOptions options) {
  if (n < 8 || n % 8 != 0)
    throw ConfigError("init_params: grid side must be divisible by 8, got " +
                      std::to_string(n));
  if (!(dt > 0.0)) throw ConfigError("init_params: dt must be positive");
  ModelParams p;
  p.dt = dt;
  p.grid_n = n;
  p.options = options;
  int nl = n / 8;

  std::mt19937_64 rng(seed);
  for (int i = 0; i < 3; ++i) {
    p.encoder.conv[i].weight = glorot_conv(rng, 4, kEncoderCh[i], kEncoderCh[i + 1]);
    p.encoder.conv[i].bias = Tensor({kEncoderCh[i + 1]});
  }
  for (Tensor* w : {&p.lstm.w_xi, &p.lstm.w_hi, &p.lstm.w_xf, &p.lstm.w_hf,
                    &p.lstm.w_xc, &p.lstm.w_hc, &p.lstm.w_xo, &p.lstm.w_ho})
    *w = glorot_conv(rng, 3, 64, 64);
  p.lstm.w_ci = Tensor({nl, nl, 64});
  p.lstm.w_cf = Tensor({nl, nl, 64});
  p.lstm.b_i = Tensor({64});
  p.lstm.b_f = Tensor({64});
  p.lstm.b_c = Tensor({64});
  p.lstm.b_o = Tensor({64});
  for (int i = 0; i < 3; ++i) {
    p.decoder.conv[i].weight = glorot_conv(rng, 3, kDecoderIn[i], kDecoderOut[i]);
    p.decoder.conv[i].bias = Tensor({kDecoderOut[i]});
  }
  std::uniform_real_distribution<double> alpha_dist(-kTwoPi, kTwoPi);
  double alpha = 0.0;
  do {
    alpha = alpha_dist(rng);
  } while (std::abs(alpha) < 0.1);
  p.lstm.alpha = Tensor::scalar(alpha);
  return p;
}

Tensor encoder_forward(const Tensor& x, const EncoderParams& enc) {
  if (x.rank() != 3 || x.shape()[2] != 2 || x.shape()[0] != x.shape()[1] ||
      x.shape()[0] % 8 != 0)
    throw ShapeError("encoder input must be (n, n, 2) with n divisible by 8, got " +
                     shape_str(x.shape()));
  Tensor out = x;
  for (int i = 0; i < 3; ++i)
    out = tanh(conv2d_periodic(out, enc.conv[i].weight, 2, 1, enc.conv[i].bias));
  return out;
}

std::pair<Tensor, Tensor> encode(const Field& field, const ModelParams& params) {
  if (field.channels != 2)
    throw ShapeError("encode: field must have 2 channels, got " +
                     std::to_string(field.channels));
  Tensor x({field.grid.n, field.grid.n, 2}, field.data);
  Tensor latent = encoder_forward(x, params.encoder);
  return {channel_slice(latent, 0, 32), channel_slice(latent, 32, 64)};
}

std::pair<Tensor, Tensor> convlstm_step(const Tensor& x, const Tensor& h_prev,
                                        const Tensor& c_prev, const ConvLstmParams& lstm,
                                        const ModelOptions& options) {
  if (x.shape() != h_prev.shape() || x.shape() != c_prev.shape())
    throw ShapeError("convlstm_step: x " + shape_str(x.shape()) + ", h " +
                     shape_str(h_prev.shape()) + ", c " + shape_str(c_prev.shape()) +
                     " must agree");
  Tensor i_gate = sigmoid(add(add(conv2d_periodic(x, lstm.w_xi, 1, 1, lstm.b_i),
                                  conv2d_periodic(h_prev, lstm.w_hi, 1, 1)),
                              mul(lstm.w_ci, c_prev)));
  Tensor f_gate = sigmoid(add(add(conv2d_periodic(x, lstm.w_xf, 1, 1, lstm.b_f),
                                  conv2d_periodic(h_prev, lstm.w_hf, 1, 1)),
                              mul(lstm.w_cf, c_prev)));
  Tensor c_cand = periodic_xi(add(conv2d_periodic(x, lstm.w_xc, 1, 1, lstm.b_c),
                                  conv2d_periodic(h_prev, lstm.w_hc, 1, 1)),
                              lstm.alpha);
  Tensor c = add(mul(f_gate, c_prev), mul(i_gate, c_cand));
  Tensor o_pre = add(conv2d_periodic(x, lstm.w_xo, 1, 1,
                                     options.output_gate_bias ? lstm.b_o : Tensor()),
                     conv2d_periodic(h_prev, lstm.w_ho, 1, 1));
  Tensor o_gate = sigmoid(o_pre);
  Tensor h = mul(o_gate, tanh(c));
  return {h, c};
}

Tensor decode_rate(const Tensor& h, const DecoderParams& dec, const ModelOptions& options) {
  require_latent_shape(h, "decode input");
  Tensor out = h;
  for (int i = 0; i < 3; ++i) {
    out = conv2d_periodic(out, dec.conv[i].weight, 1, 1, dec.conv[i].bias);
    bool last = (i == 2);
    if (!(last && options.final_linear)) out = tanh(out);
    out = pixel_shuffle(out, 2);
  }
  return out;
}

Field decode(const Tensor& h, const ModelParams& params, const Grid& grid, double t) {
  Tensor rate = decode_rate(h, params.decoder, params.options);
  if (rate.shape()[0] != grid.n)
    throw ShapeError("decode: rate side " + std::to_string(rate.shape()[0]) +
                     " does not match grid side " + std::to_string(grid.n));
  Field f(grid, 2, t);
  f.data = rate.vec();
  return f;
}

Tensor zero_state(int n) {
  if (n < 8 || n % 8 != 0)
    throw ConfigError("zero_state: grid side must be divisible by 8");
  return Tensor({n / 8, n / 8, 64});
}

StepOutput network_step(const Tensor& u_prev, const Tensor& h_prev, const Tensor& c_prev,
                        const ModelParams& params) {
  Tensor latent = encoder_forward(u_prev, params.encoder);
  auto [h, c] = convlstm_step(latent, h_prev, c_prev, params.lstm, params.options);
  Tensor rate = decode_rate(h, params.decoder, params.options);
  StepOutput out;
  out.u = add(u_prev, scale(rate, params.dt));
  out.h = h;
  out.c = c;
  out.latent_u = channel_slice(latent, 0, 32);
  out.latent_v = channel_slice(latent, 32, 64);
  return out;
}

std::tuple<Field, Tensor, Tensor> step(const Field& u_prev, const Tensor& h_prev,
                                       const Tensor& c_prev, const ModelParams& params) {
  if (u_prev.channels != 2)
    throw ShapeError("step: field must have 2 channels");
  Tensor u({u_prev.grid.n, u_prev.grid.n, 2}, u_prev.data);
  StepOutput so = network_step(u, h_prev, c_prev, params);
  Field next(u_prev.grid, 2, u_prev.t + params.dt);
  next.data = so.u.vec();
  return {std::move(next), so.h, so.c};
}

Rollout rollout(const Field& ic, int steps, const ModelParams& params) {
  if (steps < 1) throw ConfigError("rollout: steps must be >= 1");
  if (ic.grid.n != params.grid_n)
    throw ShapeError("rollout: ic grid side " + std::to_string(ic.grid.n) +
                     " does not match model grid side " + std::to_string(params.grid_n));
  Rollout r;
  r.seq.dt = params.dt;
  r.seq.fields.reserve(steps + 1);
  r.seq.fields.push_back(ic);
  Tensor u({ic.grid.n, ic.grid.n, 2}, ic.data);
  Tensor h = zero_state(ic.grid.n);
  Tensor c = zero_state(ic.grid.n);
  for (int k = 0; k < steps; ++k) {
    StepOutput so = network_step(u, h, c, params);
    if (!so.u.all_finite()) {
      std::ostringstream os;
      os << "rollout produced a non-finite state at step " << (k + 1);
      throw NumericError(os.str());
    }
    u = so.u;
    h = so.h;
    c = so.c;
    r.latent_u.push_back(so.latent_u);
    r.latent_v.push_back(so.latent_v);
    Field f(ic.grid, 2, ic.t + (k + 1) * params.dt);
    f.data = u.vec();
    r.seq.fields.push_back(std::move(f));
  }
  return r;
}

}  // namespace pdnet
