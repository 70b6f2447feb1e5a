#include "pdnet/reference.hpp"

#include <cmath>
#include <sstream>

namespace pdnet {

namespace {

Field axpy(const Field& y, double a, const Field& x) {
  Field out = y;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += a * x.data[i];
  return out;
}

}  // namespace

void SolveConfig::validate() const {
  pde.validate();
  if (!(dt_ref > 0.0)) throw ConfigError("solve: dt_ref must be positive");
  if (save_every < 1) throw ConfigError("solve: save_every must be >= 1");
  if (t_end < 0.0) throw ConfigError("solve: t_end must be >= 0");
  double diff = pde.max_diffusivity();
  if (diff > 0.0) {
    double dx = grid.dx();
    double bound = 0.2 * dx * dx / diff;
    if (dt_ref > bound) {
      std::ostringstream os;
      os << "solve: dt_ref " << dt_ref << " violates the diffusion stability bound "
         << bound << " (0.2 dx^2 / diffusivity at dx = " << dx << ")";
      throw ConfigError(os.str());
    }
  }
}

Field rk4_step(const Field& y, const std::function<Field(const Field&)>& rhs, double dt) {
  auto check = [&](const Field& f, int stage) {
    if (!f.all_finite()) {
      std::ostringstream os;
      os << "rk4_step: non-finite value in stage " << stage << " at t = " << y.t;
      throw NumericError(os.str());
    }
  };
  Field k1 = rhs(y);
  check(k1, 1);
  Field k2 = rhs(axpy(y, 0.5 * dt, k1));
  check(k2, 2);
  Field k3 = rhs(axpy(y, 0.5 * dt, k2));
  check(k3, 3);
  Field k4 = rhs(axpy(y, dt, k3));
  check(k4, 4);
  Field out = y;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] += dt / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);
  out.t = y.t + dt;
  return out;
}

Field rk4_step(const Field& field, const PdeSpec& spec, const DerivativeFilterSet& filters,
               double dt_ref) {
  return rk4_step(field, [&](const Field& f) { return pde_rhs(spec, f, filters); }, dt_ref);
}

FieldSequence solve(const SolveConfig& cfg, const Field& ic) {
  cfg.validate();
  if (!(ic.grid == cfg.grid))
    throw ShapeError("solve: initial condition grid does not match configuration grid");
  if (!ic.all_finite()) throw NumericError("solve: initial condition is not finite");

  FieldSequence seq;
  seq.dt = cfg.dt_ref * cfg.save_every;
  seq.fields.push_back(ic);

  long total_steps = std::lround(cfg.t_end / cfg.dt_ref);
  if (std::abs(total_steps * cfg.dt_ref - cfg.t_end) > 1e-9 * std::max(cfg.dt_ref, cfg.t_end)) {
    std::ostringstream os;
    os << "solve: t_end " << cfg.t_end << " is not an integer multiple of dt_ref "
       << cfg.dt_ref;
    throw ConfigError(os.str());
  }

  Field state = ic;
  for (long step = 1; step <= total_steps; ++step) {
    state = rk4_step(state, cfg.pde, cfg.filters, cfg.dt_ref);
    if (state.max_abs() > 1e6) {
      std::ostringstream os;
      os << "solve: field blew up (sup norm > 1e6) at t = " << state.t;
      throw NumericError(os.str());
    }
    if (step % cfg.save_every == 0) seq.fields.push_back(state);
  }
  return seq;
}

}  // namespace pdnet
