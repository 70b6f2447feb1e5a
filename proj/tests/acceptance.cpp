// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Each criterion is self-contained and catches its own
// exceptions so one failure cannot mask the others.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pdnet/config.hpp"
#include "pdnet/grid.hpp"
#include "pdnet/metrics.hpp"
#include "pdnet/network.hpp"
#include "pdnet/ops.hpp"
#include "pdnet/pddo.hpp"
#include "pdnet/physics.hpp"
#include "pdnet/reference.hpp"
#include "pdnet/sequence_io.hpp"
#include "pdnet/trainer.hpp"

using namespace pdnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<double> flatten(const ModelParams& p) {
  std::vector<double> all;
  for (const auto& [name, t] : p.named_params())
    all.insert(all.end(), t->vec().begin(), t->vec().end());
  return all;
}

// ---------------------------------------------------------------------------
// 1. discrete orthogonality identities of the derivative filters
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  double worst = 0.0;
  for (int m : {1, 2, 3}) {
    DerivativeFilterSet f = DerivativeFilterSet::build(m, 1.0 / 64, m + 1.015);
    OrthogonalityReport rep = check_orthogonality(f, 1e-9);
    worst = std::max(worst, rep.max_defect);
    if (!rep.pass)
      return {false, "m=" + std::to_string(m) +
                         " defect " + fmt(rep.max_defect) + " exceeds 1e-9"};
  }
  return {true, "36 identities for m in {1,2,3}, worst defect " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 2. exact differentiation of random quadratics over a raw family
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  const int m = 2;
  const double dx = 1.0 / 32;
  DerivativeFilterSet filters = DerivativeFilterSet::build(m, dx, 3.015);
  Family fam = build_family(m, dx, 3.015);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    double c[6], x0 = coef(rng), y0 = coef(rng);
    for (double& v : c) v = coef(rng);
    auto p = [&](double x, double y) {
      return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * y * y + c[5] * x * y;
    };
    const double exact[6] = {p(x0, y0),
                             c[1] + 2 * c[3] * x0 + c[5] * y0,
                             c[2] + 2 * c[4] * y0 + c[5] * x0,
                             2 * c[3],
                             2 * c[4],
                             c[5]};
    for (int d = 0; d < 6; ++d) {
      const std::vector<double>& kern = filters.kernel(static_cast<Deriv>(d));
      double est = 0.0;
      for (std::size_t j = 0; j < fam.offsets.size(); ++j)
        est += kern[j] * p(x0 + fam.offsets[j][0], y0 + fam.offsets[j][1]);
      double err = std::abs(est - exact[d]) / std::max(1.0, std::abs(exact[d]));
      worst = std::max(worst, err);
    }
  }
  if (worst >= 1e-8) return {false, "worst relative error " + fmt(worst) + " >= 1e-8"};
  return {true, "8 random quadratics, all 6 orders, worst error " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 3. grid convergence of the first derivative on a trig mode
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  const double two_pi = 2.0 * std::acos(-1.0);
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    Grid g = make_grid(n, 0.0, 1.0);
    DerivativeFilterSet filters = DerivativeFilterSet::build(2, g.dx(), 3.015);
    Field u = sample_field(g, 1, [&](double x, double y, int) {
      return std::sin(two_pi * x) * std::sin(two_pi * y);
    });
    Field du = apply_derivative(u, filters, Deriv::d10);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double exact = two_pi * std::cos(two_pi * g.coord(j)) *
                       std::sin(two_pi * g.coord(i));
        double d = du.at(i, j, 0) - exact;
        num += d * d;
        den += exact * exact;
      }
    errs.push_back(std::sqrt(num / den));
  }
  if (!(errs[0] > errs[1] && errs[1] > errs[2]))
    return {false, "errors not strictly decreasing: " + fmt(errs[0]) + ", " +
                       fmt(errs[1]) + ", " + fmt(errs[2])};
  if (!(errs[2] < 1e-2))
    return {false, "error at n=128 is " + fmt(errs[2]) + " >= 1e-2"};
  return {true, "rel L2 " + fmt(errs[0]) + " -> " + fmt(errs[1]) + " -> " +
                    fmt(errs[2]) + " over n in {32,64,128}"};
}

// ---------------------------------------------------------------------------
// 4. gradient check: primitives and a full training window
// ---------------------------------------------------------------------------
double gradcheck_case(const std::function<Tensor(const std::vector<Tensor>&)>& build,
                      std::vector<Tensor> inputs, double h = 1e-6) {
  Tape tape;
  std::vector<Tensor> tracked;
  tracked.reserve(inputs.size());
  for (Tensor& t : inputs) tracked.push_back(tape.watch(t));
  tape.backward(build(tracked));

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<double> g = tape.grad_or_zeros(tracked[i]);
    for (int j = 0; j < inputs[i].size(); ++j) {
      double orig = inputs[i].data()[j];
      inputs[i].data()[j] = orig + h;
      double fp = build(inputs).value();
      inputs[i].data()[j] = orig - h;
      double fm = build(inputs).value();
      inputs[i].data()[j] = orig;
      double fd = (fp - fm) / (2 * h);
      double err = std::abs(g[j] - fd) / std::max({std::abs(g[j]), std::abs(fd), 1e-8});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

Outcome criterion_4() {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto rnd = [&](Shape s) {
    Tensor t(std::move(s));
    for (int i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
    return t;
  };

  // (a) every primitive against central differences
  double worst_prim = 0.0;
  auto run = [&](const char* /*name*/,
                 const std::function<Tensor(const std::vector<Tensor>&)>& build,
                 std::vector<Tensor> inputs) {
    worst_prim = std::max(worst_prim, gradcheck_case(build, std::move(inputs)));
  };
  using V = const std::vector<Tensor>&;
  run("add", [](V t) { return mean_of_squares(add(t[0], t[1])); },
      {rnd({3, 4}), rnd({3, 4})});
  run("sub", [](V t) { return mean_of_squares(sub(t[0], t[1])); },
      {rnd({3, 4}), rnd({3, 4})});
  run("mul", [](V t) { return mean_of_squares(mul(t[0], t[1])); },
      {rnd({3, 4}), rnd({3, 4})});
  run("broadcast", [](V t) { return mean_of_squares(mul(t[0], t[1])); },
      {rnd({3, 4}), rnd({})});
  run("affine", [](V t) { return mean_of_squares(affine(t[0], 1.7, -0.3)); },
      {rnd({5})});
  run("scale", [](V t) { return mean_of_squares(scale(t[0], -2.5)); }, {rnd({5})});
  run("sigmoid", [](V t) { return mean_of_squares(sigmoid(t[0])); }, {rnd({6})});
  run("tanh", [](V t) { return mean_of_squares(tanh(t[0])); }, {rnd({6})});
  run("square", [](V t) { return mean_of_squares(square(t[0])); }, {rnd({6})});
  run("sum", [](V t) { return square(sum(t[0])); }, {rnd({2, 3})});
  run("mean_of_squares", [](V t) { return mean_of_squares(t[0]); }, {rnd({7})});
  run("periodic_xi", [](V t) { return mean_of_squares(periodic_xi(t[0], t[1])); },
      {rnd({6}), Tensor::scalar(1.3)});
  run("conv_s1",
      [](V t) { return mean_of_squares(conv2d_periodic(t[0], t[1], 1, 1, t[2])); },
      {rnd({4, 4, 2}), rnd({3, 3, 2, 3}), rnd({3})});
  run("conv_s2",
      [](V t) { return mean_of_squares(conv2d_periodic(t[0], t[1], 2, 1, t[2])); },
      {rnd({4, 4, 2}), rnd({4, 4, 2, 3}), rnd({3})});
  run("pixel_shuffle", [](V t) { return mean_of_squares(pixel_shuffle(t[0], 2)); },
      {rnd({2, 2, 8})});
  run("pixel_unshuffle", [](V t) { return mean_of_squares(pixel_unshuffle(t[0], 2)); },
      {rnd({4, 4, 2})});
  run("concat_slice",
      [](V t) {
        return mean_of_squares(channel_slice(channel_concat(t[0], t[1]), 1, 3));
      },
      {rnd({3, 3, 2}), rnd({3, 3, 2})});
  {
    std::vector<double> kern(9);
    for (double& v : kern) v = dist(rng);
    run("stencil",
        [kern](V t) {
          return mean_of_squares(stencil_apply_periodic(t[0], kern, 3));
        },
        {rnd({4, 4, 2})});
  }
  if (worst_prim >= 1e-5)
    return {false, "primitive gradcheck worst " + fmt(worst_prim) + " >= 1e-5"};

  // (b) one full training window on an 8x8 grid, 3 steps
  Grid grid = make_grid(8, 0.0, 1.0);
  Grid latent_grid = make_grid(1, 0.0, 1.0);
  DerivativeFilterSet filters = DerivativeFilterSet::build(2, grid.dx(), 3.015);
  DerivativeFilterSet latent_filters =
      DerivativeFilterSet::build(2, latent_grid.dx(), 3.015);
  PdeSpec spec;  // viscous advective defaults
  const double dt = 0.01;
  ModelParams params = init_params(3, 8, dt);
  Field ic = sample_burgers_ic(1, grid, 0.2);
  Tensor ic_tensor({8, 8, 2}, ic.data);

  auto window_loss = [&](const ModelParams& P) {
    Tensor u = ic_tensor;
    Tensor h = zero_state(8), c = zero_state(8);
    std::vector<Tensor> seq{u}, lu, lv;
    for (int i = 0; i < 3; ++i) {
      StepOutput so = network_step(seq.back(), h, c, P);
      seq.push_back(so.u);
      lu.push_back(so.latent_u);
      lv.push_back(so.latent_v);
      h = so.h;
      c = so.c;
    }
    std::vector<Tensor> out_res = output_residual(spec, seq, dt, filters);
    std::vector<Tensor> lat_res =
        latent_residual(spec, lu, lv, dt, latent_grid, latent_filters);
    return total_loss(out_res, lat_res, 1.0, 1.0);
  };

  Tape tape;
  ModelParams tracked = params.tracked(tape);
  tape.backward(window_loss(tracked));

  // Central differences on a sampled subset (first/middle/last entry of each
  // parameter). h = 1e-5 keeps the FD noise floor ~1e-11; entries whose
  // gradient sits below 1e-6 are compared against that floor instead of
  // their own magnitude.
  const double h = 1e-5;
  double worst_window = 0.0;
  auto master = params.named_params();
  auto shadow = tracked.named_params();
  for (std::size_t i = 0; i < master.size(); ++i) {
    std::vector<double> g = tape.grad_or_zeros(*shadow[i].second);
    std::vector<int> picks{0};
    int sz = master[i].second->size();
    if (sz > 2) picks.push_back(sz / 2);
    if (sz > 1) picks.push_back(sz - 1);
    for (int j : picks) {
      double* slot = master[i].second->data() + j;
      double orig = *slot;
      *slot = orig + h;
      double fp = window_loss(params).value();
      *slot = orig - h;
      double fm = window_loss(params).value();
      *slot = orig;
      double fd = (fp - fm) / (2 * h);
      double err = std::abs(g[j] - fd) / std::max({std::abs(g[j]), std::abs(fd), 1e-6});
      worst_window = std::max(worst_window, err);
    }
  }
  if (worst_window >= 1e-4)
    return {false, "window gradcheck worst " + fmt(worst_window) + " >= 1e-4"};
  return {true, "primitives worst " + fmt(worst_prim) + ", window worst " +
                    fmt(worst_window)};
}

// ---------------------------------------------------------------------------
// 5. architecture shape contract at n = 128 and n = 32
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  for (int n : {128, 32}) {
    ModelParams params = init_params(1, n, 0.002);
    Field ic = sample_burgers_ic(4, make_grid(n, 0.0, 1.0), 0.2);
    Tensor x({n, n, 2}, ic.data);

    auto expect = [&](const Tensor& t, Shape want, const char* what) {
      if (t.shape() != want)
        throw ShapeError(std::string(what) + " shape is " + shape_str(t.shape()) +
                         ", wanted " + shape_str(want) + " at n=" + std::to_string(n));
    };

    // encoder chain 2 -> 8 -> 32 -> 64 halving the grid three times
    Tensor e1 = tanh(conv2d_periodic(x, params.encoder.conv[0].weight, 2, 1,
                                     params.encoder.conv[0].bias));
    expect(e1, {n / 2, n / 2, 8}, "encoder stage 1");
    Tensor e2 = tanh(conv2d_periodic(e1, params.encoder.conv[1].weight, 2, 1,
                                     params.encoder.conv[1].bias));
    expect(e2, {n / 4, n / 4, 32}, "encoder stage 2");
    Tensor e3 = tanh(conv2d_periodic(e2, params.encoder.conv[2].weight, 2, 1,
                                     params.encoder.conv[2].bias));
    expect(e3, {n / 8, n / 8, 64}, "encoder stage 3");
    Tensor enc = encoder_forward(x, params.encoder);
    expect(enc, {n / 8, n / 8, 64}, "encoder output");
    if (enc.vec() != e3.vec())
      return {false, "encoder_forward differs from the listed conv chain"};

    // decoder chain 64 -> 16 -> 8 -> 2 channels, doubling the grid each stage
    Tensor d1 = pixel_shuffle(tanh(conv2d_periodic(enc, params.decoder.conv[0].weight,
                                                   1, 1, params.decoder.conv[0].bias)),
                              2);
    expect(d1, {n / 4, n / 4, 16}, "decoder stage 1");
    Tensor d2 = pixel_shuffle(tanh(conv2d_periodic(d1, params.decoder.conv[1].weight,
                                                   1, 1, params.decoder.conv[1].bias)),
                              2);
    expect(d2, {n / 2, n / 2, 8}, "decoder stage 2");
    Tensor d3 = pixel_shuffle(tanh(conv2d_periodic(d2, params.decoder.conv[2].weight,
                                                   1, 1, params.decoder.conv[2].bias)),
                              2);
    expect(d3, {n, n, 2}, "decoder stage 3");
    Tensor rate = decode_rate(enc, params.decoder, params.options);
    expect(rate, {n, n, 2}, "decoder output");
    if (rate.vec() != d3.vec())
      return {false, "decode_rate differs from the listed conv chain"};

    // one integrator step: state, recurrent state, split latents
    StepOutput so = network_step(x, zero_state(n), zero_state(n), params);
    expect(so.u, {n, n, 2}, "next state");
    expect(so.h, {n / 8, n / 8, 64}, "hidden state");
    expect(so.c, {n / 8, n / 8, 64}, "cell state");
    expect(so.latent_u, {n / 8, n / 8, 32}, "latent u");
    expect(so.latent_v, {n / 8, n / 8, 32}, "latent v");
  }
  return {true, "16x16x64 latent and 128x128x2 output chains assert at n=128, n=32"};
}

// ---------------------------------------------------------------------------
// 6. periodic activation identities
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  const double pi = std::acos(-1.0);
  const double tol = 1e-10;
  double worst = 0.0;
  auto note = [&](double defect) { worst = std::max(worst, defect); };

  const int N = 601;
  std::vector<double> xs(N);
  for (int i = 0; i < N; ++i) xs[i] = -3.0 + 6.0 * i / (N - 1);
  Tensor x({N}, xs);

  for (double a : {0.1, 0.5, 1.0, 2.2, 4.9, 2 * pi, -0.3, -1.7}) {
    Tensor alpha = Tensor::scalar(a);

    // fixed point at the origin
    double at0 = periodic_xi(Tensor::scalar(0.0), alpha).value();
    note(std::abs(at0));
    if (std::abs(at0) > tol) return {false, "xi_alpha(0) = " + fmt(at0)};

    Tensor y = periodic_xi(x, alpha);
    double period = pi / std::abs(a);
    std::vector<double> xs_shift(N);
    for (int i = 0; i < N; ++i) xs_shift[i] = xs[i] + period;
    Tensor y_shift = periodic_xi(Tensor({N}, xs_shift), alpha);

    for (int i = 0; i < N; ++i) {
      // 0 <= xi(x) - x <= 1/|alpha|, mirrored below the axis for negative
      // alpha (the offset sin^2(ax)/a carries alpha's sign)
      double off = (y.data()[i] - xs[i]) * (a > 0 ? 1.0 : -1.0);
      note(std::max(0.0, -off));
      note(std::max(0.0, off - 1.0 / std::abs(a)));
      if (off < -tol || off > 1.0 / std::abs(a) + tol)
        return {false, "offset bound violated: alpha=" + fmt(a) + " x=" + fmt(xs[i])};

      // monotone nondecreasing
      if (i > 0) {
        double rise = y.data()[i] - y.data()[i - 1];
        note(std::max(0.0, -rise));
        if (rise < -tol)
          return {false, "monotonicity violated: alpha=" + fmt(a) + " x=" + fmt(xs[i])};
      }

      // xi(x) - x has period pi/|alpha|
      double defect =
          std::abs((y_shift.data()[i] - xs_shift[i]) - (y.data()[i] - xs[i]));
      note(defect);
      if (defect > tol)
        return {false, "period defect " + fmt(defect) + " at alpha=" + fmt(a)};
    }
  }
  return {true, "fixed point, offset bound, monotonicity, period pi/|alpha|; worst defect " +
                    fmt(worst)};
}

// ---------------------------------------------------------------------------
// 7. reference solver physics
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  const double two_pi = 2.0 * std::acos(-1.0);

  // (a) pure-diffusion decay of the fundamental mode
  {
    const double nu = 0.005;
    SolveConfig sc;
    sc.pde.kind = PdeKind::burgers;
    sc.pde.burgers.nu = nu;
    sc.pde.burgers.advection = false;
    sc.grid = make_grid(64, 0.0, 1.0);
    sc.t_end = 1.0;
    sc.dt_ref = 0.005;
    sc.save_every = 200;
    sc.filters = DerivativeFilterSet::build(2, sc.grid.dx(), 3.015);
    Field ic = sample_field(sc.grid, 2, [&](double x, double y, int ch) {
      return (ch == 0 ? 1.0 : 0.5) * std::sin(two_pi * x) * std::sin(two_pi * y);
    });
    FieldSequence seq = solve(sc, ic);
    if (seq.steps() != 2) return {false, "diffusion run saved an unexpected count"};
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < ic.data.size(); ++i) {
      n0 += seq.fields[0].data[i] * seq.fields[0].data[i];
      n1 += seq.fields[1].data[i] * seq.fields[1].data[i];
    }
    double measured = std::sqrt(n1 / n0);
    double exact = std::exp(-8.0 * std::acos(-1.0) * std::acos(-1.0) * nu * 1.0);
    double rel = std::abs(measured / exact - 1.0);
    if (rel >= 0.01)
      return {false, "diffusion decay off by " + fmt(rel) + " (measured " +
                         fmt(measured) + ", exact " + fmt(exact) + ")"};
  }

  // (b) bounded reaction-diffusion run to t = 10
  {
    SolveConfig sc;
    sc.pde.kind = PdeKind::gray_scott;  // eps1 2e-5, eps2 1e-5, b 0.04, d 0.1
    sc.grid = make_grid(64, -0.2, 0.2);
    sc.t_end = 10.0;
    sc.dt_ref = 0.25;  // bound is 0.2*dx^2/eps1 = 0.39
    sc.save_every = 8;
    sc.filters = DerivativeFilterSet::build(2, sc.grid.dx(), 3.015);
    Field ic(sc.grid, 2);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        bool center = i >= 24 && i < 40 && j >= 24 && j < 40;
        ic.at(i, j, 0) = center ? 0.5 : 1.0;
        ic.at(i, j, 1) = center ? 0.25 : 0.0;
      }
    FieldSequence seq = solve(sc, ic);
    if (seq.steps() != 6) return {false, "reaction run saved an unexpected count"};
    for (const Field& f : seq.fields) {
      if (!f.all_finite()) return {false, "reaction run left the finite range"};
      if (f.max_abs() > 1.5)
        return {false, "reaction run amplitude " + fmt(f.max_abs()) + " > 1.5"};
    }
  }

  // (c) integrator self-convergence on du/dt = -u^2, exact 1/(1+t)
  double order;
  {
    Grid g1 = make_grid(1, 0.0, 1.0);
    auto rhs = [](const Field& f) {
      Field r = f;
      r.data[0] = -f.data[0] * f.data[0];
      return r;
    };
    auto integrate = [&](int steps) {
      Field y(g1, 1, 0.0, 1.0);
      double dt = 1.0 / steps;
      for (int s = 0; s < steps; ++s) y = rk4_step(y, rhs, dt);
      return std::abs(y.data[0] - 0.5);
    };
    double e16 = integrate(16), e32 = integrate(32);
    order = std::log2(e16 / e32);
    if (!(order >= 3.5)) return {false, "observed order " + fmt(order) + " < 3.5"};
  }
  return {true, "decay within 1%, reaction bounded to t=10, order " + fmt(order)};
}

// ---------------------------------------------------------------------------
// 8. desk-scale unsupervised training
// ---------------------------------------------------------------------------
TrainConfig desk_train_config() {
  TrainConfig tc;
  tc.grid = make_grid(32, 0.0, 1.0);
  tc.steps = 100;
  tc.dt = 0.002;
  tc.epochs = 50;
  tc.lr0 = 1e-3;
  tc.lr_final = 1e-4;
  tc.bptt_window = 10;
  tc.seed = 1;
  tc.options.final_linear = true;
  return tc;  // viscous advective physics by default, nu = 0.005
}

FieldSequence desk_reference(const TrainConfig& tc, const Field& ic, double t_end) {
  SolveConfig sc;
  sc.pde = tc.pde;
  sc.grid = tc.grid;
  sc.t_end = t_end;
  sc.dt_ref = 5e-4;
  sc.save_every = 4;  // saved spacing = training dt
  sc.filters = DerivativeFilterSet::build(tc.filter_m, tc.grid.dx(), tc.horizon_factor);
  return solve(sc, ic);
}

FieldSequence slice_sequence(const FieldSequence& seq, int begin, int end) {
  FieldSequence out;
  out.dt = seq.dt;
  out.fields.assign(seq.fields.begin() + begin, seq.fields.begin() + end);
  return out;
}

Outcome criterion_8() {
  TrainConfig tc = desk_train_config();
  Field ic = sample_burgers_ic(7, tc.grid, 0.2);

  TrainResult tr = train(tc, ic);
  if (tr.aborted) return {false, "training aborted: " + tr.message};
  double first = tr.history.front().loss_total;
  double last = tr.history.back().loss_total;
  double ratio = last / first;
  if (!(ratio <= 0.1))
    return {false, "loss ratio " + fmt(ratio) + " > 0.1 (first " + fmt(first) +
                       ", last " + fmt(last) + ")"};

  // reference trajectory covering training plus 50% extrapolation
  FieldSequence ref = desk_reference(tc, ic, 0.3);  // 151 fields, dt 0.002
  Rollout ro = rollout(ic, 150, tr.params);

  ErrorReport train_err =
      relative_l2_error(slice_sequence(ro.seq, 0, 101), slice_sequence(ref, 0, 101));
  if (!(train_err.aggregate_all <= 0.1))
    return {false, "training-window rel L2 " + fmt(train_err.aggregate_all) + " > 0.1"};

  ErrorReport extrap_err =
      relative_l2_error(slice_sequence(ro.seq, 101, 151), slice_sequence(ref, 101, 151));
  if (!(extrap_err.aggregate_all <= 0.3))
    return {false, "extrapolation rel L2 " + fmt(extrap_err.aggregate_all) + " > 0.3"};
  ErrorReport full_err =
      relative_l2_error(slice_sequence(ro.seq, 0, 151), slice_sequence(ref, 0, 151));
  for (const StepError& e : full_err.steps)
    if (!std::isfinite(e.rel_all))
      return {false, "non-finite error at step " + std::to_string(e.step)};

  return {true, "loss ratio " + fmt(ratio) + ", train rel L2 " +
                    fmt(train_err.aggregate_all) + ", extrapolation rel L2 " +
                    fmt(extrap_err.aggregate_all)};
}

// ---------------------------------------------------------------------------
// 9. the latent loss term changes training and lowers the latent residual
// ---------------------------------------------------------------------------
Outcome criterion_9() {
  TrainConfig base = desk_train_config();
  base.steps = 60;
  base.epochs = 30;
  Field ic = sample_burgers_ic(7, base.grid, 0.2);

  TrainConfig with_lat = base;
  with_lat.w_lat = 1.0;
  TrainConfig no_lat = base;
  no_lat.w_lat = 0.0;

  TrainResult a = train(with_lat, ic);
  TrainResult b = train(no_lat, ic);
  if (a.aborted || b.aborted) return {false, "a paired run aborted"};
  if (flatten(a.params) == flatten(b.params))
    return {false, "identical parameters despite different latent weights"};

  Grid latent_grid = make_grid(base.grid.n / 8, base.grid.x_min, base.grid.x_max);
  DerivativeFilterSet latent_filters =
      DerivativeFilterSet::build(base.filter_m, latent_grid.dx(), base.horizon_factor);
  auto latent_mse = [&](const ModelParams& params) {
    Rollout ro = rollout(ic, base.steps, params);
    std::vector<Tensor> res = latent_residual(base.pde, ro.latent_u, ro.latent_v,
                                              base.dt, latent_grid, latent_filters);
    return residual_mse(res).value();
  };
  double mse_with = latent_mse(a.params);
  double mse_without = latent_mse(b.params);
  if (!(mse_with <= mse_without))
    return {false, "latent MSE " + fmt(mse_with) + " (w_lat=1) > " +
                       fmt(mse_without) + " (w_lat=0)"};
  return {true, "trajectories differ; latent MSE " + fmt(mse_with) +
                    " (w_lat=1) <= " + fmt(mse_without) + " (w_lat=0)"};
}

// ---------------------------------------------------------------------------
// 10. determinism and binary formats
// ---------------------------------------------------------------------------
Outcome criterion_10() {
  auto pipeline = [&](const std::string& tag) {
    Grid grid = make_grid(16, 0.0, 1.0);
    std::string base = "/tmp/pdnet_accept_" + tag;
    Field ic = sample_burgers_ic(3, grid, 0.2);

    SolveConfig sc;
    sc.grid = grid;
    sc.t_end = 0.05;
    sc.dt_ref = 1e-3;
    sc.save_every = 5;
    sc.filters = DerivativeFilterSet::build(2, grid.dx(), 3.015);
    FieldSequence ref = solve(sc, ic);
    write_sequence(ref, base + ".pdseq");

    TrainConfig tc;
    tc.grid = grid;
    tc.steps = 8;
    tc.dt = 0.002;
    tc.epochs = 2;
    tc.bptt_window = 4;
    tc.seed = 2;
    TrainResult tr = train(tc, ic);
    if (tr.aborted) throw NumericError("pipeline training aborted: " + tr.message);
    save_checkpoint(tr.params, base + ".pdckp");
    write_loss_history_csv(tr.history, base + ".csv");
    sc.filters.save(base + ".pdflt");
    return base;
  };

  std::string run1 = pipeline("run1");
  std::string run2 = pipeline("run2");
  for (const char* ext : {".pdseq", ".pdckp", ".csv", ".pdflt"}) {
    if (read_bytes(run1 + ext) != read_bytes(run2 + ext))
      return {false, std::string("artifact ") + ext + " differs between seeded runs"};
  }

  // every container round-trips bit-exactly
  FieldSequence seq = read_sequence(run1 + ".pdseq");
  write_sequence(seq, run1 + ".pdseq2");
  if (read_bytes(run1 + ".pdseq") != read_bytes(run1 + ".pdseq2"))
    return {false, "sequence container round trip is not bit-exact"};

  ModelParams mp = load_checkpoint(run1 + ".pdckp");
  save_checkpoint(mp, run1 + ".pdckp2");
  if (read_bytes(run1 + ".pdckp") != read_bytes(run1 + ".pdckp2"))
    return {false, "checkpoint round trip is not bit-exact"};

  std::vector<EpochStats> hist = read_loss_history_csv(run1 + ".csv");
  write_loss_history_csv(hist, run1 + ".csv2");
  if (read_bytes(run1 + ".csv") != read_bytes(run1 + ".csv2"))
    return {false, "loss history round trip is not bit-exact"};

  DerivativeFilterSet filters = DerivativeFilterSet::load(run1 + ".pdflt");
  filters.save(run1 + ".pdflt2");
  if (read_bytes(run1 + ".pdflt") != read_bytes(run1 + ".pdflt2"))
    return {false, "filter container round trip is not bit-exact"};

  return {true, "two seeded pipelines byte-identical; all four containers round-trip"};
}

}  // namespace

int main() {
  struct Entry {
    int num;
    const char* what;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "derivative-filter orthogonality", criterion_1},
      {2, "quadratic polynomial exactness", criterion_2},
      {3, "derivative grid convergence", criterion_3},
      {4, "autodiff gradient check", criterion_4},
      {5, "architecture shape contract", criterion_5},
      {6, "periodic activation identities", criterion_6},
      {7, "reference solver physics", criterion_7},
      {8, "desk-scale unsupervised training", criterion_8},
      {9, "latent loss effect", criterion_9},
      {10, "determinism and formats", criterion_10},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Outcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", out.pass ? "PASS" : "FAIL",
                e.num, e.what, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures == 0)
    std::printf("all 10 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
