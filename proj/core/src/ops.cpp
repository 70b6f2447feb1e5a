#include "pdnet/ops.hpp"

#include <atomic>
#include <cmath>
#include <initializer_list>

namespace pdnet {

namespace {

std::atomic<std::uint64_t> g_xi_clamp_count{0};

Tape* resolve_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->defined() || !t->tracked()) continue;
    if (tape && t->tape() != tape)
      throw ConfigError("op inputs are tracked on different tapes");
    tape = t->tape();
  }
  return tape;
}

Tensor finish(Tape* tape, Shape shape, std::vector<double> values,
              Tape::BackwardFn backward) {
  if (tape) return tape->make_tracked(std::move(shape), std::move(values), std::move(backward));
  return Tensor(std::move(shape), std::move(values));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor input");
}

int wrap_idx(int v, int n) { return ((v % n) + n) % n; }

enum class Broadcast { none, a_scalar, b_scalar };

Broadcast binary_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (a.rank() == 0) return Broadcast::a_scalar;
  if (b.rank() == 0) return Broadcast::b_scalar;
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                   " vs " + shape_str(b.shape()));
}

}  // namespace

std::uint64_t periodic_xi_clamp_count() { return g_xi_clamp_count.load(); }
void reset_periodic_xi_clamp_count() { g_xi_clamp_count.store(0); }

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  Broadcast bc = binary_broadcast(a, b, "add");
  const Shape& out_shape = (bc == Broadcast::a_scalar) ? b.shape() : a.shape();
  int n = (bc == Broadcast::a_scalar) ? b.size() : a.size();
  std::vector<double> out(n);
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0; i < n; ++i) {
    double av = (bc == Broadcast::a_scalar) ? pa[0] : pa[i];
    double bv = (bc == Broadcast::b_scalar) ? pb[0] : pb[i];
    out[i] = av + bv;
  }
  Tape* tape = resolve_tape({&a, &b});
  int na = a.tracked() ? a.node() : -1;
  int nb = b.tracked() ? b.node() : -1;
  int sa = a.size(), sb = b.size();
  return finish(tape, out_shape, std::move(out),
                [na, nb, sa, sb, bc](Tape& tp, const std::vector<double>& g) {
                  if (na >= 0) {
                    auto& ga = tp.accum(na, sa);
                    if (bc == Broadcast::a_scalar) {
                      for (double gv : g) ga[0] += gv;
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                  }
                  if (nb >= 0) {
                    auto& gb = tp.accum(nb, sb);
                    if (bc == Broadcast::b_scalar) {
                      for (double gv : g) gb[0] += gv;
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                    }
                  }
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_defined(a, "sub");
  require_defined(b, "sub");
  Broadcast bc = binary_broadcast(a, b, "sub");
  const Shape& out_shape = (bc == Broadcast::a_scalar) ? b.shape() : a.shape();
  int n = (bc == Broadcast::a_scalar) ? b.size() : a.size();
  std::vector<double> out(n);
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0; i < n; ++i) {
    double av = (bc == Broadcast::a_scalar) ? pa[0] : pa[i];
    double bv = (bc == Broadcast::b_scalar) ? pb[0] : pb[i];
    out[i] = av - bv;
  }
  Tape* tape = resolve_tape({&a, &b});
  int na = a.tracked() ? a.node() : -1;
  int nb = b.tracked() ? b.node() : -1;
  int sa = a.size(), sb = b.size();
  return finish(tape, out_shape, std::move(out),
                [na, nb, sa, sb, bc](Tape& tp, const std::vector<double>& g) {
                  if (na >= 0) {
                    auto& ga = tp.accum(na, sa);
                    if (bc == Broadcast::a_scalar) {
                      for (double gv : g) ga[0] += gv;
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                  }
                  if (nb >= 0) {
                    auto& gb = tp.accum(nb, sb);
                    if (bc == Broadcast::b_scalar) {
                      for (double gv : g) gb[0] -= gv;
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                    }
                  }
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  Broadcast bc = binary_broadcast(a, b, "mul");
  const Shape& out_shape = (bc == Broadcast::a_scalar) ? b.shape() : a.shape();
  int n = (bc == Broadcast::a_scalar) ? b.size() : a.size();
  std::vector<double> out(n);
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0; i < n; ++i) {
    double av = (bc == Broadcast::a_scalar) ? pa[0] : pa[i];
    double bv = (bc == Broadcast::b_scalar) ? pb[0] : pb[i];
    out[i] = av * bv;
  }
  Tape* tape = resolve_tape({&a, &b});
  int na = a.tracked() ? a.node() : -1;
  int nb = b.tracked() ? b.node() : -1;
  int sa = a.size(), sb = b.size();
  // Backward needs the recorded values; op outputs are never mutated, so
  // sharing storage is safe and avoids a deep copy.
  Tensor da = a.detached();
  Tensor db = b.detached();
  return finish(tape, out_shape, std::move(out),
                [na, nb, sa, sb, bc, da, db](Tape& tp, const std::vector<double>& g) {
                  const double* pa = da.data();
                  const double* pb = db.data();
                  if (na >= 0) {
                    auto& ga = tp.accum(na, sa);
                    if (bc == Broadcast::a_scalar) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[0] += g[i] * pb[i];
                    } else if (bc == Broadcast::b_scalar) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb[0];
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb[i];
                    }
                  }
                  if (nb >= 0) {
                    auto& gb = tp.accum(nb, sb);
                    if (bc == Broadcast::b_scalar) {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[0] += g[i] * pa[i];
                    } else if (bc == Broadcast::a_scalar) {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa[0];
                    } else {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa[i];
                    }
                  }
                });
}

Tensor affine(const Tensor& x, double a, double b) {
  require_defined(x, "affine");
  int n = x.size();
  std::vector<double> out(n);
  const double* px = x.data();
  for (int i = 0; i < n; ++i) out[i] = a * px[i] + b;
  Tape* tape = resolve_tape({&x});
  int nx = x.tracked() ? x.node() : -1;
  return finish(tape, x.shape(), std::move(out),
                [nx, n, a](Tape& tp, const std::vector<double>& g) {
                  if (nx < 0) return;
                  auto& gx = tp.accum(nx, n);
                  for (int i = 0; i < n; ++i) gx[i] += a * g[i];
                });
}

Tensor scale(const Tensor& x, double a) { return affine(x, a, 0.0); }

Tensor sigmoid(const Tensor& x) {
  require_defined(x, "sigmoid");
  int n = x.size();
  std::vector<double> out(n);
  const double* px = x.data();
  for (int i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-px[i]));
  Tape* tape = resolve_tape({&x});
  Tensor result(x.shape(), std::move(out));
  if (!tape) return result;
  int nx = x.node();
  Tensor out_ref = result;  // untracked alias of the output storage
  return tape->adopt(result, [nx, n, out_ref](Tape& tp, const std::vector<double>& g) {
    if (nx < 0) return;
    auto& gx = tp.accum(nx, n);
    const double* po = out_ref.data();
    for (int i = 0; i < n; ++i) gx[i] += g[i] * po[i] * (1.0 - po[i]);
  });
}

Tensor tanh(const Tensor& x) {
  require_defined(x, "tanh");
  int n = x.size();
  std::vector<double> out(n);
  const double* px = x.data();
  for (int i = 0; i < n; ++i) out[i] = std::tanh(px[i]);
  Tape* tape = resolve_tape({&x});
  Tensor result(x.shape(), std::move(out));
  if (!tape) return result;
  int nx = x.node();
  Tensor out_ref = result;  // untracked alias of the output storage
  return tape->adopt(result, [nx, n, out_ref](Tape& tp, const std::vector<double>& g) {
    if (nx < 0) return;
    auto& gx = tp.accum(nx, n);
    const double* po = out_ref.data();
    for (int i = 0; i < n; ++i) gx[i] += g[i] * (1.0 - po[i] * po[i]);
  });
}

Tensor square(const Tensor& x) {
  require_defined(x, "square");
  int n = x.size();
  std::vector<double> out(n);
  const double* px = x.data();
  for (int i = 0; i < n; ++i) out[i] = px[i] * px[i];
  Tape* tape = resolve_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(out));
  int nx = x.node();
  Tensor xin = x.detached();
  return tape->make_tracked(x.shape(), std::move(out),
                            [nx, n, xin](Tape& tp, const std::vector<double>& g) {
                              if (nx < 0) return;
                              auto& gx = tp.accum(nx, n);
                              const double* px = xin.data();
                              for (int i = 0; i < n; ++i) gx[i] += 2.0 * px[i] * g[i];
                            });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) acc += x.data()[i];
  Tape* tape = resolve_tape({&x});
  if (!tape) return Tensor::scalar(acc);
  int nx = x.node();
  int n = x.size();
  return tape->make_tracked(Shape{}, {acc},
                            [nx, n](Tape& tp, const std::vector<double>& g) {
                              if (nx < 0) return;
                              auto& gx = tp.accum(nx, n);
                              for (int i = 0; i < n; ++i) gx[i] += g[0];
                            });
}

Tensor mean_of_squares(const Tensor& x) {
  require_defined(x, "mean_of_squares");
  return scale(sum(square(x)), 1.0 / static_cast<double>(x.size()));
}

Tensor periodic_xi(const Tensor& x, const Tensor& alpha) {
  require_defined(x, "periodic_xi");
  require_defined(alpha, "periodic_xi");
  if (alpha.rank() != 0)
    throw ShapeError("periodic_xi: alpha must be rank-0, got " + shape_str(alpha.shape()));
  double a_raw = alpha.data()[0];
  bool clamped = std::abs(a_raw) < periodic_xi_alpha_floor;
  double a = a_raw;
  if (clamped) {
    a = (a_raw < 0.0) ? -periodic_xi_alpha_floor : periodic_xi_alpha_floor;
    g_xi_clamp_count.fetch_add(1);
  }
  int n = x.size();
  std::vector<double> out(n);
  const double* px = x.data();
  for (int i = 0; i < n; ++i) {
    double s = std::sin(a * px[i]);
    out[i] = px[i] + s * s / a;
  }
  Tape* tape = resolve_tape({&x, &alpha});
  if (!tape) return Tensor(x.shape(), std::move(out));
  int nx = x.tracked() ? x.node() : -1;
  int nalpha = alpha.tracked() ? alpha.node() : -1;
  Tensor xin = x.detached();
  return tape->make_tracked(
      x.shape(), std::move(out),
      [nx, nalpha, n, a, clamped, xin](Tape& tp, const std::vector<double>& g) {
        const double* px = xin.data();
        if (nx >= 0) {
          auto& gx = tp.accum(nx, n);
          for (int i = 0; i < n; ++i) gx[i] += g[i] * (1.0 + std::sin(2.0 * a * px[i]));
        }
        if (nalpha >= 0 && !clamped) {
          // d/da [x + sin^2(ax)/a] = x*sin(2ax)/a - sin^2(ax)/a^2
          auto& ga = tp.accum(nalpha, 1);
          double acc = 0.0;
          for (int i = 0; i < n; ++i) {
            double s = std::sin(a * px[i]);
            acc += g[i] * (px[i] * std::sin(2.0 * a * px[i]) / a - s * s / (a * a));
          }
          ga[0] += acc;
        }
      });
}

Tensor conv2d_periodic(const Tensor& input, const Tensor& kernels, int stride,
                       int pad, const Tensor& bias) {
  require_defined(input, "conv2d_periodic");
  require_defined(kernels, "conv2d_periodic");
  if (input.rank() != 3)
    throw ShapeError("conv2d_periodic: input must be (H,W,C), got " + shape_str(input.shape()));
  if (kernels.rank() != 4 || kernels.shape()[0] != kernels.shape()[1])
    throw ShapeError("conv2d_periodic: kernels must be (k,k,Cin,Cout), got " +
                     shape_str(kernels.shape()));
  const int H = input.shape()[0], W = input.shape()[1], Cin = input.shape()[2];
  const int k = kernels.shape()[0], KCin = kernels.shape()[2], Cout = kernels.shape()[3];
  if (KCin != Cin)
    throw ShapeError("conv2d_periodic: kernel expects " + std::to_string(KCin) +
                     " input channels, field has " + std::to_string(Cin));
  if (stride < 1 || pad < 0) throw ConfigError("conv2d_periodic: stride must be >= 1, pad >= 0");
  if ((H + 2 * pad - k) % stride != 0 || (W + 2 * pad - k) % stride != 0 ||
      H + 2 * pad < k)
    throw ShapeError("conv2d_periodic: size " + shape_str(input.shape()) +
                     " incompatible with k=" + std::to_string(k) + " stride=" +
                     std::to_string(stride) + " pad=" + std::to_string(pad));
  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.shape()[0] != Cout))
    throw ShapeError("conv2d_periodic: bias must be (Cout)");

  std::vector<int> wy(static_cast<std::size_t>(Ho) * k), wx(static_cast<std::size_t>(Wo) * k);
  for (int oy = 0; oy < Ho; ++oy)
    for (int ky = 0; ky < k; ++ky) wy[oy * k + ky] = wrap_idx(oy * stride - pad + ky, H);
  for (int ox = 0; ox < Wo; ++ox)
    for (int kx = 0; kx < k; ++kx) wx[ox * k + kx] = wrap_idx(ox * stride - pad + kx, W);

  std::vector<double> out(static_cast<std::size_t>(Ho) * Wo * Cout, 0.0);
  const double* in = input.data();
  const double* kw = kernels.data();
  for (int oy = 0; oy < Ho; ++oy) {
    for (int ox = 0; ox < Wo; ++ox) {
      double* op = &out[(static_cast<std::size_t>(oy) * Wo + ox) * Cout];
      if (has_bias) {
        const double* bp = bias.data();
        for (int co = 0; co < Cout; ++co) op[co] = bp[co];
      }
      for (int ky = 0; ky < k; ++ky) {
        int iy = wy[oy * k + ky];
        for (int kx = 0; kx < k; ++kx) {
          int ix = wx[ox * k + kx];
          const double* ip = &in[(static_cast<std::size_t>(iy) * W + ix) * Cin];
          const double* kp = &kw[(static_cast<std::size_t>(ky) * k + kx) * Cin * Cout];
          for (int ci = 0; ci < Cin; ++ci) {
            double xv = ip[ci];
            const double* kr = kp + static_cast<std::size_t>(ci) * Cout;
            for (int co = 0; co < Cout; ++co) op[co] += xv * kr[co];
          }
        }
      }
    }
  }

  Tape* tape = resolve_tape({&input, &kernels, &bias});
  if (!tape) return Tensor({Ho, Wo, Cout}, std::move(out));

  int nin = input.tracked() ? input.node() : -1;
  int nk = kernels.tracked() ? kernels.node() : -1;
  int nb = (has_bias && bias.tracked()) ? bias.node() : -1;
  Tensor in_ref = input.detached();
  Tensor k_ref = kernels.detached();
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    const double* in = in_ref.data();
    const double* kw = k_ref.data();
    std::vector<double>* gin = (nin >= 0) ? &tp.accum(nin, H * W * Cin) : nullptr;
    std::vector<double>* gk = (nk >= 0) ? &tp.accum(nk, k * k * Cin * Cout) : nullptr;
    std::vector<double>* gb = (nb >= 0) ? &tp.accum(nb, Cout) : nullptr;
    for (int oy = 0; oy < Ho; ++oy) {
      for (int ox = 0; ox < Wo; ++ox) {
        const double* gp = &g[(static_cast<std::size_t>(oy) * Wo + ox) * Cout];
        if (gb) {
          for (int co = 0; co < Cout; ++co) (*gb)[co] += gp[co];
        }
        for (int ky = 0; ky < k; ++ky) {
          int iy = wy[oy * k + ky];
          for (int kx = 0; kx < k; ++kx) {
            int ix = wx[ox * k + kx];
            std::size_t in_off = (static_cast<std::size_t>(iy) * W + ix) * Cin;
            std::size_t k_off = (static_cast<std::size_t>(ky) * k + kx) * Cin * Cout;
            for (int ci = 0; ci < Cin; ++ci) {
              const double* kr = &kw[k_off + static_cast<std::size_t>(ci) * Cout];
              if (gin) {
                double acc = 0.0;
                for (int co = 0; co < Cout; ++co) acc += kr[co] * gp[co];
                (*gin)[in_off + ci] += acc;
              }
              if (gk) {
                double xv = in[in_off + ci];
                double* gkr = &(*gk)[k_off + static_cast<std::size_t>(ci) * Cout];
                for (int co = 0; co < Cout; ++co) gkr[co] += xv * gp[co];
              }
            }
          }
        }
      }
    }
  };
  return tape->make_tracked({Ho, Wo, Cout}, std::move(out), std::move(backward));
}

Tensor pixel_shuffle(const Tensor& input, int r) {
  require_defined(input, "pixel_shuffle");
  if (input.rank() != 3)
    throw ShapeError("pixel_shuffle: input must be (H,W,C), got " + shape_str(input.shape()));
  if (r < 1) throw ConfigError("pixel_shuffle: r must be >= 1");
  const int H = input.shape()[0], W = input.shape()[1], C = input.shape()[2];
  const int r2 = r * r;
  if (C % r2 != 0)
    throw ShapeError("pixel_shuffle: channels " + std::to_string(C) +
                     " not divisible by r^2 = " + std::to_string(r2));
  const int Co = C / r2, Ho = H * r, Wo = W * r;
  // Permutation: out index for each input index. Captures by value because
  // the backward closure outlives this frame.
  std::vector<double> out(static_cast<std::size_t>(Ho) * Wo * Co);
  auto out_index = [=](int y, int x, int cin) {
    int c = cin / r2, rem = cin % r2, dy = rem / r, dx = rem % r;
    return (static_cast<std::size_t>(y * r + dy) * Wo + (x * r + dx)) * Co + c;
  };
  const double* in = input.data();
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int cin = 0; cin < C; ++cin)
        out[out_index(y, x, cin)] = in[(static_cast<std::size_t>(y) * W + x) * C + cin];

  Tape* tape = resolve_tape({&input});
  if (!tape) return Tensor({Ho, Wo, Co}, std::move(out));
  int nin = input.node();
  int in_size = input.size();
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    if (nin < 0) return;
    auto& gin = tp.accum(nin, in_size);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int cin = 0; cin < C; ++cin)
          gin[(static_cast<std::size_t>(y) * W + x) * C + cin] += g[out_index(y, x, cin)];
  };
  return tape->make_tracked({Ho, Wo, Co}, std::move(out), std::move(backward));
}

Tensor pixel_unshuffle(const Tensor& input, int r) {
  require_defined(input, "pixel_unshuffle");
  if (input.rank() != 3)
    throw ShapeError("pixel_unshuffle: input must be (H,W,C), got " + shape_str(input.shape()));
  if (r < 1) throw ConfigError("pixel_unshuffle: r must be >= 1");
  const int Ho = input.shape()[0], Wo = input.shape()[1], Co = input.shape()[2];
  if (Ho % r != 0 || Wo % r != 0)
    throw ShapeError("pixel_unshuffle: spatial size " + shape_str(input.shape()) +
                     " not divisible by r = " + std::to_string(r));
  const int H = Ho / r, W = Wo / r, r2 = r * r, C = Co * r2;
  std::vector<double> out(static_cast<std::size_t>(H) * W * C);
  // By-value capture: the backward closure outlives this frame.
  auto in_index = [=](int y, int x, int cin) {
    int c = cin / r2, rem = cin % r2, dy = rem / r, dx = rem % r;
    return (static_cast<std::size_t>(y * r + dy) * Wo + (x * r + dx)) * Co + c;
  };
  const double* in = input.data();
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int cin = 0; cin < C; ++cin)
        out[(static_cast<std::size_t>(y) * W + x) * C + cin] = in[in_index(y, x, cin)];

  Tape* tape = resolve_tape({&input});
  if (!tape) return Tensor({H, W, C}, std::move(out));
  int nin = input.node();
  int in_size = input.size();
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    if (nin < 0) return;
    auto& gin = tp.accum(nin, in_size);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int cin = 0; cin < C; ++cin)
          gin[in_index(y, x, cin)] += g[(static_cast<std::size_t>(y) * W + x) * C + cin];
  };
  return tape->make_tracked({H, W, C}, std::move(out), std::move(backward));
}

Tensor channel_concat(const Tensor& a, const Tensor& b) {
  require_defined(a, "channel_concat");
  require_defined(b, "channel_concat");
  if (a.rank() != 3 || b.rank() != 3 || a.shape()[0] != b.shape()[0] ||
      a.shape()[1] != b.shape()[1])
    throw ShapeError("channel_concat: incompatible shapes " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  const int H = a.shape()[0], W = a.shape()[1], Ca = a.shape()[2], Cb = b.shape()[2];
  const int C = Ca + Cb;
  std::vector<double> out(static_cast<std::size_t>(H) * W * C);
  const double* pa = a.data();
  const double* pb = b.data();
  for (int p = 0; p < H * W; ++p) {
    for (int c = 0; c < Ca; ++c) out[static_cast<std::size_t>(p) * C + c] = pa[static_cast<std::size_t>(p) * Ca + c];
    for (int c = 0; c < Cb; ++c) out[static_cast<std::size_t>(p) * C + Ca + c] = pb[static_cast<std::size_t>(p) * Cb + c];
  }
  Tape* tape = resolve_tape({&a, &b});
  if (!tape) return Tensor({H, W, C}, std::move(out));
  int na = a.tracked() ? a.node() : -1;
  int nb = b.tracked() ? b.node() : -1;
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    if (na >= 0) {
      auto& ga = tp.accum(na, H * W * Ca);
      for (int p = 0; p < H * W; ++p)
        for (int c = 0; c < Ca; ++c)
          ga[static_cast<std::size_t>(p) * Ca + c] += g[static_cast<std::size_t>(p) * C + c];
    }
    if (nb >= 0) {
      auto& gb = tp.accum(nb, H * W * Cb);
      for (int p = 0; p < H * W; ++p)
        for (int c = 0; c < Cb; ++c)
          gb[static_cast<std::size_t>(p) * Cb + c] += g[static_cast<std::size_t>(p) * C + Ca + c];
    }
  };
  return tape->make_tracked({H, W, C}, std::move(out), std::move(backward));
}

Tensor channel_slice(const Tensor& x, int c_begin, int c_end) {
  require_defined(x, "channel_slice");
  if (x.rank() != 3)
    throw ShapeError("channel_slice: input must be (H,W,C), got " + shape_str(x.shape()));
  const int H = x.shape()[0], W = x.shape()[1], C = x.shape()[2];
  if (c_begin < 0 || c_end > C || c_begin >= c_end)
    throw ShapeError("channel_slice: range [" + std::to_string(c_begin) + "," +
                     std::to_string(c_end) + ") invalid for " + std::to_string(C) +
                     " channels");
  const int Cs = c_end - c_begin;
  std::vector<double> out(static_cast<std::size_t>(H) * W * Cs);
  const double* px = x.data();
  for (int p = 0; p < H * W; ++p)
    for (int c = 0; c < Cs; ++c)
      out[static_cast<std::size_t>(p) * Cs + c] = px[static_cast<std::size_t>(p) * C + c_begin + c];
  Tape* tape = resolve_tape({&x});
  if (!tape) return Tensor({H, W, Cs}, std::move(out));
  int nx = x.node();
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    if (nx < 0) return;
    auto& gx = tp.accum(nx, H * W * C);
    for (int p = 0; p < H * W; ++p)
      for (int c = 0; c < Cs; ++c)
        gx[static_cast<std::size_t>(p) * C + c_begin + c] += g[static_cast<std::size_t>(p) * Cs + c];
  };
  return tape->make_tracked({H, W, Cs}, std::move(out), std::move(backward));
}

Tensor stencil_apply_periodic(const Tensor& input, const std::vector<double>& kernel,
                              int k) {
  require_defined(input, "stencil_apply_periodic");
  if (input.rank() != 3)
    throw ShapeError("stencil_apply_periodic: input must be (H,W,C), got " +
                     shape_str(input.shape()));
  if (k < 1 || k % 2 == 0 || static_cast<int>(kernel.size()) != k * k)
    throw ShapeError("stencil_apply_periodic: kernel must be odd k x k");
  const int H = input.shape()[0], W = input.shape()[1], C = input.shape()[2];
  const int m = k / 2;
  // Fields smaller than the stencil are legal: offsets wrap as many times
  // as needed (degenerate latent grids of small models).
  std::vector<double> out(static_cast<std::size_t>(H) * W * C, 0.0);
  const double* in = input.data();
  std::vector<int> wyi(static_cast<std::size_t>(H) * k), wxi(static_cast<std::size_t>(W) * k);
  for (int y = 0; y < H; ++y)
    for (int d = 0; d < k; ++d) wyi[y * k + d] = wrap_idx(y + d - m, H);
  for (int x = 0; x < W; ++x)
    for (int d = 0; d < k; ++d) wxi[x * k + d] = wrap_idx(x + d - m, W);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double* op = &out[(static_cast<std::size_t>(y) * W + x) * C];
      for (int di = 0; di < k; ++di) {
        int yy = wyi[y * k + di];
        for (int dj = 0; dj < k; ++dj) {
          int xx = wxi[x * k + dj];
          double wv = kernel[static_cast<std::size_t>(di) * k + dj];
          const double* ip = &in[(static_cast<std::size_t>(yy) * W + xx) * C];
          for (int c = 0; c < C; ++c) op[c] += wv * ip[c];
        }
      }
    }
  }
  Tape* tape = resolve_tape({&input});
  if (!tape) return Tensor(input.shape(), std::move(out));
  int nin = input.node();
  Shape in_shape = input.shape();
  std::vector<double> kern = kernel;
  auto backward = [=](Tape& tp, const std::vector<double>& g) {
    if (nin < 0) return;
    auto& gin = tp.accum(nin, H * W * C);
    // Adjoint of correlation: gather with negated offsets.
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double* gp = &gin[(static_cast<std::size_t>(y) * W + x) * C];
        for (int di = 0; di < k; ++di) {
          int yy = wrap_idx(y - (di - m), H);
          for (int dj = 0; dj < k; ++dj) {
            int xx = wrap_idx(x - (dj - m), W);
            double wv = kern[static_cast<std::size_t>(di) * k + dj];
            const double* gq = &g[(static_cast<std::size_t>(yy) * W + xx) * C];
            for (int c = 0; c < C; ++c) gp[c] += wv * gq[c];
          }
        }
      }
    }
  };
  return tape->make_tracked(in_shape, std::move(out), std::move(backward));
}

}  // namespace pdnet
