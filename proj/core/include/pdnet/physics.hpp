#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdnet/grid.hpp"
#include "pdnet/pddo.hpp"
#include "pdnet/tensor.hpp"

namespace pdnet {

enum class PdeKind { burgers, lambda_omega, gray_scott };

const char* pde_kind_name(PdeKind kind);
PdeKind pde_kind_from_name(const std::string& name);

struct BurgersCoeffs {
  double nu = 0.005;
  // Test hook: disables the advection terms, leaving pure diffusion.
  bool advection = true;
};

struct LambdaOmegaCoeffs {
  double diffusion = 0.1;
  // Literal form: r = u^2 + v^2, lambda = 1 - r^2, omega = -r^2 (quartic).
  // Literature form: lambda = 1 - A^2, omega = -beta*A^2 with A^2 = u^2 + v^2.
  bool literal_form = true;
  double beta = 1.0;
};

struct GrayScottCoeffs {
  double eps1 = 2e-5;
  double eps2 = 1e-5;
  double b = 0.04;
  double d = 0.1;
};

struct PdeSpec {
  PdeKind kind = PdeKind::burgers;
  BurgersCoeffs burgers;
  LambdaOmegaCoeffs lambda_omega;
  GrayScottCoeffs gray_scott;

  // Largest diffusion coefficient, used by explicit stability bounds.
  double max_diffusivity() const;
  void validate() const;
};

// Time derivative the PDE implies for a 2-channel state (u, v):
//   burgers:      ( -u*u_x - v*u_y + nu*Lap(u),  -u*v_x - v*v_y + nu*Lap(v) )
//   lambda_omega: ( D*Lap(u) + lambda*u - omega*v,  D*Lap(v) + omega*u + lambda*v )
//   gray_scott:   ( eps1*Lap(u) + b*(1-u) - u*v^2,  eps2*Lap(v) - d*v + u*v^2 )
// The tensor form is differentiable; the Field form checks grid/filter dx
// agreement.
Tensor pde_rhs(const PdeSpec& spec, const Tensor& field, const DerivativeFilterSet& filters);
Field pde_rhs(const PdeSpec& spec, const Field& field, const DerivativeFilterSet& filters);

// R_k = temporal_derivative(seq)_k - pde_rhs(seq_{k+1}): one residual per
// interior timestep, T-2 in total.
std::vector<Tensor> output_residual(const PdeSpec& spec, const std::vector<Tensor>& seq,
                                    double dt, const DerivativeFilterSet& filters);
std::vector<Field> output_residual(const PdeSpec& spec, const FieldSequence& seq,
                                   const DerivativeFilterSet& filters);

// Treats channel c of (latent_u, latent_v) as one (u, v) pair, evaluates the
// same PDE residual for each pair on the latent grid, and returns the
// per-timestep mean over pairs (a 2-channel residual tensor per interior
// step). filters_latent must be built for the latent grid spacing.
std::vector<Tensor> latent_residual(const PdeSpec& spec,
                                    const std::vector<Tensor>& latent_u,
                                    const std::vector<Tensor>& latent_v, double dt,
                                    const Grid& latent_grid,
                                    const DerivativeFilterSet& filters_latent);

// Mean square over every entry of every listed residual.
Tensor residual_mse(const std::vector<Tensor>& residuals);

// w_out * MSE(output residuals) + w_lat * MSE(latent residuals); each MSE is
// the mean square over every entry of every listed residual.
Tensor total_loss(const std::vector<Tensor>& output_res,
                  const std::vector<Tensor>& latent_res, double w_out, double w_lat);

// Gaussian-random-field initial condition with spectrum
//   u0_hat(k) = amplitude * 25 * xi_k / ((2*pi*|k|)^2 + 25),
// xi_k unit-variance Hermitian white noise (FFT of N(0,1) real noise divided
// by n). The realized power spectrum is proportional to 625/((2pi|k|)^2+25)^2
// for any amplitude; amplitude sets the pointwise std (about 1.45*amplitude).
// Defaults to 0.2, which matches the field range of the benchmark datasets
// this sampler stands in for. Both channels are drawn independently.
// Requires power-of-two n.
Field sample_burgers_ic(std::uint64_t seed, const Grid& grid, double amplitude = 0.2);

}  // namespace pdnet
