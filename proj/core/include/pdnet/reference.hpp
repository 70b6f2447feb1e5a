#pragma once

#include <functional>

#include "pdnet/grid.hpp"
#include "pdnet/pddo.hpp"
#include "pdnet/physics.hpp"

namespace pdnet {

struct SolveConfig {
  PdeSpec pde;
  Grid grid;
  double t_end = 0.0;
  double dt_ref = 0.0;
  int save_every = 1;
  DerivativeFilterSet filters;

  // Explicit-diffusion stability heuristic: dt_ref <= 0.2 dx^2 / max
  // diffusivity, and dt_ref must not exceed the save interval. Violations
  // are configuration errors.
  void validate() const;
};

// Generic classic RK4 stage driver, exposed for direct testing against
// scalar ODE oracles. Raises NumericError naming the stage when an
// intermediate leaves the finite range.
Field rk4_step(const Field& y, const std::function<Field(const Field&)>& rhs, double dt);

// One RK4 step of the configured PDE.
Field rk4_step(const Field& field, const PdeSpec& spec, const DerivativeFilterSet& filters,
               double dt_ref);

// Integrates the IC to t_end, saving the state every save_every steps
// (saved dt = save_every * dt_ref). The IC itself is saved as step 0.
// Raises NumericError with the failure time when the sup norm passes 1e6.
FieldSequence solve(const SolveConfig& cfg, const Field& ic);

}  // namespace pdnet
