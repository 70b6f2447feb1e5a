// Microbenchmarks for the hot paths: derivative-filter construction, the
// convolution forward/backward kernels, stencil application, the random-field
// sampler, one reference-integrator step, and one full surrogate step.

#include <benchmark/benchmark.h>

#include <random>

#include "pdnet/grid.hpp"
#include "pdnet/network.hpp"
#include "pdnet/ops.hpp"
#include "pdnet/pddo.hpp"
#include "pdnet/physics.hpp"
#include "pdnet/reference.hpp"

namespace {

using namespace pdnet;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

void BM_FilterBuild(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(DerivativeFilterSet::build(m, 1.0 / 64, m + 1.015));
}
BENCHMARK(BM_FilterBuild)->Arg(1)->Arg(2)->Arg(3);

void BM_Conv2dForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tensor x = random_tensor({n, n, 64}, 1);
  Tensor w = random_tensor({3, 3, 64, 64}, 2);
  Tensor b = random_tensor({64}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_periodic(x, w, 1, 1, b));
}
BENCHMARK(BM_Conv2dForward)->Arg(4)->Arg(16);

void BM_Conv2dBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tensor x = random_tensor({n, n, 64}, 1);
  Tensor w = random_tensor({3, 3, 64, 64}, 2);
  Tensor b = random_tensor({64}, 3);
  for (auto _ : state) {
    Tape tape;
    Tensor out =
        mean_of_squares(conv2d_periodic(tape.watch(x), tape.watch(w), 1, 1, tape.watch(b)));
    tape.backward(out);
    benchmark::DoNotOptimize(tape.grad(w));
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(4)->Arg(16);

void BM_StencilApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tensor x = random_tensor({n, n, 2}, 4);
  DerivativeFilterSet filters = DerivativeFilterSet::build(2, 1.0 / n, 3.015);
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_derivative(x, filters, Deriv::d20));
}
BENCHMARK(BM_StencilApply)->Arg(32)->Arg(128);

void BM_RandomFieldSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = make_grid(n, 0.0, 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_burgers_ic(seed++, g, 0.2));
}
BENCHMARK(BM_RandomFieldSample)->Arg(32)->Arg(128);

void BM_Rk4Step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = make_grid(n, 0.0, 1.0);
  PdeSpec spec;  // viscous advective defaults
  DerivativeFilterSet filters = DerivativeFilterSet::build(2, g.dx(), 3.015);
  Field ic = sample_burgers_ic(7, g, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(rk4_step(ic, spec, filters, 1e-4));
}
BENCHMARK(BM_Rk4Step)->Arg(32)->Arg(128);

void BM_NetworkStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = make_grid(n, 0.0, 1.0);
  ModelParams params = init_params(1, n, 0.002);
  Field ic = sample_burgers_ic(7, g, 0.2);
  Tensor u({n, n, 2}, ic.data);
  Tensor h = zero_state(n), c = zero_state(n);
  for (auto _ : state) benchmark::DoNotOptimize(network_step(u, h, c, params));
}
BENCHMARK(BM_NetworkStep)->Arg(32)->Arg(128);

void BM_TrainingWindow(benchmark::State& state) {
  const int n = 32;
  Grid g = make_grid(n, 0.0, 1.0);
  Grid latent = make_grid(n / 8, 0.0, 1.0);
  PdeSpec spec;
  DerivativeFilterSet filters = DerivativeFilterSet::build(2, g.dx(), 3.015);
  DerivativeFilterSet latent_filters = DerivativeFilterSet::build(2, latent.dx(), 3.015);
  ModelParams params = init_params(1, n, 0.002);
  Field ic = sample_burgers_ic(7, g, 0.2);
  Tensor ic_tensor({n, n, 2}, ic.data);
  for (auto _ : state) {
    Tape tape;
    ModelParams tracked = params.tracked(tape);
    Tensor u = ic_tensor, h = zero_state(n), c = zero_state(n);
    std::vector<Tensor> seq{u}, lu, lv;
    for (int i = 0; i < 10; ++i) {
      StepOutput so = network_step(seq.back(), h, c, tracked);
      seq.push_back(so.u);
      lu.push_back(so.latent_u);
      lv.push_back(so.latent_v);
      h = so.h;
      c = so.c;
    }
    Tensor loss = total_loss(output_residual(spec, seq, 0.002, filters),
                             latent_residual(spec, lu, lv, 0.002, latent, latent_filters),
                             1.0, 1.0);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.value());
  }
}
BENCHMARK(BM_TrainingWindow)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
