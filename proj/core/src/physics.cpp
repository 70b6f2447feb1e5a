#include "pdnet/physics.hpp"

#include <cmath>
#include <sstream>

#include "pdnet/ops.hpp"

namespace pdnet {

const char* pde_kind_name(PdeKind kind) {
  switch (kind) {
    case PdeKind::burgers: return "burgers";
    case PdeKind::lambda_omega: return "lambda_omega";
    case PdeKind::gray_scott: return "gray_scott";
  }
  return "unknown";
}

PdeKind pde_kind_from_name(const std::string& name) {
  if (name == "burgers") return PdeKind::burgers;
  if (name == "lambda_omega") return PdeKind::lambda_omega;
  if (name == "gray_scott") return PdeKind::gray_scott;
  throw ConfigError("unknown pde kind '" + name +
                    "' (expected burgers, lambda_omega, or gray_scott)");
}

double PdeSpec::max_diffusivity() const {
  switch (kind) {
    case PdeKind::burgers: return burgers.nu;
    case PdeKind::lambda_omega: return lambda_omega.diffusion;
    case PdeKind::gray_scott: return std::max(gray_scott.eps1, gray_scott.eps2);
  }
  return 0.0;
}

void PdeSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  switch (kind) {
    case PdeKind::burgers:
      if (!finite(burgers.nu) || burgers.nu < 0.0)
        throw ConfigError("burgers: nu must be finite and >= 0");
      break;
    case PdeKind::lambda_omega:
      if (!finite(lambda_omega.diffusion) || lambda_omega.diffusion < 0.0)
        throw ConfigError("lambda_omega: diffusion must be finite and >= 0");
      if (!finite(lambda_omega.beta)) throw ConfigError("lambda_omega: beta must be finite");
      break;
    case PdeKind::gray_scott:
      if (!finite(gray_scott.eps1) || !finite(gray_scott.eps2) ||
          gray_scott.eps1 < 0.0 || gray_scott.eps2 < 0.0)
        throw ConfigError("gray_scott: eps1/eps2 must be finite and >= 0");
      if (!finite(gray_scott.b) || !finite(gray_scott.d))
        throw ConfigError("gray_scott: b/d must be finite");
      break;
  }
}

namespace {

Tensor laplacian(const Tensor& x, const DerivativeFilterSet& filters) {
  return add(apply_derivative(x, filters, Deriv::d20),
             apply_derivative(x, filters, Deriv::d02));
}

void require_two_channels(const Tensor& field, const char* op) {
  if (field.rank() != 3 || field.shape()[2] != 2)
    throw ShapeError(std::string(op) + ": field must be (H,W,2), got " +
                     shape_str(field.shape()));
}

}  // namespace

Tensor pde_rhs(const PdeSpec& spec, const Tensor& field, const DerivativeFilterSet& filters) {
  require_two_channels(field, "pde_rhs");
  spec.validate();
  Tensor u = channel_slice(field, 0, 1);
  Tensor v = channel_slice(field, 1, 2);
  switch (spec.kind) {
    case PdeKind::burgers: {
      const auto& c = spec.burgers;
      Tensor ru = scale(laplacian(u, filters), c.nu);
      Tensor rv = scale(laplacian(v, filters), c.nu);
      if (c.advection) {
        Tensor ux = apply_derivative(u, filters, Deriv::d10);
        Tensor uy = apply_derivative(u, filters, Deriv::d01);
        Tensor vx = apply_derivative(v, filters, Deriv::d10);
        Tensor vy = apply_derivative(v, filters, Deriv::d01);
        ru = sub(ru, add(mul(u, ux), mul(v, uy)));
        rv = sub(rv, add(mul(u, vx), mul(v, vy)));
      }
      return channel_concat(ru, rv);
    }
    case PdeKind::lambda_omega: {
      const auto& c = spec.lambda_omega;
      Tensor a2 = add(square(u), square(v));  // u^2 + v^2
      Tensor lambda, omega;
      if (c.literal_form) {
        // r = u^2 + v^2, lambda = 1 - r^2, omega = -r^2, as printed.
        Tensor r2 = square(a2);
        lambda = affine(r2, -1.0, 1.0);
        omega = scale(r2, -1.0);
      } else {
        lambda = affine(a2, -1.0, 1.0);
        omega = scale(a2, -c.beta);
      }
      Tensor ru = add(scale(laplacian(u, filters), c.diffusion),
                      sub(mul(lambda, u), mul(omega, v)));
      Tensor rv = add(scale(laplacian(v, filters), c.diffusion),
                      add(mul(omega, u), mul(lambda, v)));
      return channel_concat(ru, rv);
    }
    case PdeKind::gray_scott: {
      const auto& c = spec.gray_scott;
      Tensor uv2 = mul(u, square(v));
      Tensor ru = add(scale(laplacian(u, filters), c.eps1),
                      sub(affine(u, -c.b, c.b), uv2));  // b*(1-u) - u*v^2
      Tensor rv = add(scale(laplacian(v, filters), c.eps2),
                      add(scale(v, -c.d), uv2));
      return channel_concat(ru, rv);
    }
  }
  throw ConfigError("pde_rhs: unknown pde kind");
}

Field pde_rhs(const PdeSpec& spec, const Field& field, const DerivativeFilterSet& filters) {
  double gdx = field.grid.dx();
  if (std::abs(gdx - filters.dx()) > 1e-12 * std::max(std::abs(gdx), filters.dx())) {
    std::ostringstream os;
    os << "pde_rhs: filters built for dx = " << filters.dx()
       << " applied to grid with dx = " << gdx;
    throw ConfigError(os.str());
  }
  Tensor in({field.grid.n, field.grid.n, field.channels}, field.data);
  Tensor out = pde_rhs(spec, in, filters);
  Field result(field.grid, field.channels, field.t);
  result.data = out.vec();
  return result;
}

std::vector<Tensor> output_residual(const PdeSpec& spec, const std::vector<Tensor>& seq,
                                    double dt, const DerivativeFilterSet& filters) {
  std::vector<Tensor> dudt = temporal_derivative(seq, dt);
  std::vector<Tensor> res;
  res.reserve(dudt.size());
  for (std::size_t k = 0; k < dudt.size(); ++k)
    res.push_back(sub(dudt[k], pde_rhs(spec, seq[k + 1], filters)));
  return res;
}

std::vector<Field> output_residual(const PdeSpec& spec, const FieldSequence& seq,
                                   const DerivativeFilterSet& filters) {
  validate_sequence(seq);
  if (seq.steps() < 3)
    throw ShapeError("output_residual needs at least 3 steps, got " +
                     std::to_string(seq.steps()));
  std::vector<Tensor> tensors;
  tensors.reserve(seq.steps());
  for (const Field& f : seq.fields)
    tensors.emplace_back(Shape{f.grid.n, f.grid.n, f.channels}, f.data);
  std::vector<Tensor> res = output_residual(spec, tensors, seq.dt, filters);
  std::vector<Field> out;
  out.reserve(res.size());
  for (std::size_t k = 0; k < res.size(); ++k) {
    Field f(seq[0].grid, seq[0].channels, seq[static_cast<int>(k) + 1].t);
    f.data = res[k].vec();
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Tensor> latent_residual(const PdeSpec& spec,
                                    const std::vector<Tensor>& latent_u,
                                    const std::vector<Tensor>& latent_v, double dt,
                                    const Grid& latent_grid,
                                    const DerivativeFilterSet& filters_latent) {
  if (latent_u.size() != latent_v.size())
    throw ShapeError("latent_residual: u/v latent sequences differ in length");
  if (latent_u.size() < 3)
    throw ShapeError("latent_residual needs at least 3 steps, got " +
                     std::to_string(latent_u.size()));
  const Shape& s = latent_u[0].shape();
  if (s.size() != 3)
    throw ShapeError("latent_residual: latents must be (H,W,P), got " + shape_str(s));
  const int pairs = s[2];
  for (std::size_t k = 0; k < latent_u.size(); ++k)
    if (latent_u[k].shape() != s || latent_v[k].shape() != s)
      throw ShapeError("latent_residual: inconsistent latent shapes at step " +
                       std::to_string(k));
  double gdx = latent_grid.dx();
  if (std::abs(gdx - filters_latent.dx()) >
      1e-12 * std::max(std::abs(gdx), filters_latent.dx())) {
    std::ostringstream os;
    os << "latent_residual: filters built for dx = " << filters_latent.dx()
       << " but latent grid has dx = " << gdx;
    throw ConfigError(os.str());
  }

  // Per-pair residuals, then the mean over pairs (the latent field is a stack
  // of (u, v) systems all obeying the same operator).
  std::vector<Tensor> mean_res;
  for (int c = 0; c < pairs; ++c) {
    std::vector<Tensor> pair_seq;
    pair_seq.reserve(latent_u.size());
    for (std::size_t k = 0; k < latent_u.size(); ++k)
      pair_seq.push_back(channel_concat(channel_slice(latent_u[k], c, c + 1),
                                        channel_slice(latent_v[k], c, c + 1)));
    std::vector<Tensor> res = output_residual(spec, pair_seq, dt, filters_latent);
    if (c == 0) {
      mean_res = std::move(res);
    } else {
      for (std::size_t k = 0; k < mean_res.size(); ++k)
        mean_res[k] = add(mean_res[k], res[k]);
    }
  }
  for (auto& r : mean_res) r = scale(r, 1.0 / static_cast<double>(pairs));
  return mean_res;
}

Tensor residual_mse(const std::vector<Tensor>& residuals) {
  if (residuals.empty()) throw ShapeError("residual_mse: empty residual list");
  Tensor acc;
  std::size_t count = 0;
  for (const Tensor& r : residuals) {
    Tensor s = sum(square(r));
    acc = acc.defined() ? add(acc, s) : s;
    count += static_cast<std::size_t>(r.size());
  }
  return scale(acc, 1.0 / static_cast<double>(count));
}

Tensor total_loss(const std::vector<Tensor>& output_res,
                  const std::vector<Tensor>& latent_res, double w_out, double w_lat) {
  if (output_res.empty() || latent_res.empty())
    throw ShapeError("total_loss: residual lists must be nonempty");
  return add(scale(residual_mse(output_res), w_out),
             scale(residual_mse(latent_res), w_lat));
}

}  // namespace pdnet
