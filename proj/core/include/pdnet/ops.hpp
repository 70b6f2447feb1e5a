#pragma once

#include <cstdint>

#include "pdnet/tensor.hpp"

namespace pdnet {

// Differentiable tensor ops. Each op computes its value eagerly and, when any
// input is tracked, records a backward rule on that tape. Mixing tensors from
// two different tapes is an error.

// Elementwise; shapes must match, except a rank-0 operand broadcasts.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// a*x + b with plain coefficients.
Tensor affine(const Tensor& x, double a, double b);
Tensor scale(const Tensor& x, double a);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor square(const Tensor& x);

// Sum of all elements, rank-0 output.
Tensor sum(const Tensor& x);
// sum(square(x)) / size: mean-square of a residual tensor.
Tensor mean_of_squares(const Tensor& x);

// Periodic activation x + sin^2(alpha*x)/alpha with trainable rank-0 alpha.
// |alpha| below `periodic_xi_alpha_floor` is silently clamped to the floor
// (sign preserved, +floor at exactly zero); each clamped evaluation bumps a
// process-wide counter readable via periodic_xi_clamp_count().
inline constexpr double periodic_xi_alpha_floor = 1e-3;
Tensor periodic_xi(const Tensor& x, const Tensor& alpha);
std::uint64_t periodic_xi_clamp_count();
void reset_periodic_xi_clamp_count();

// 2-D convolution with periodic (wrap-around) padding, channels-last.
//   input   (H, W, Cin)
//   kernels (k, k, Cin, Cout)
//   bias    (Cout) or an undefined tensor for none
// output (Ho, Wo, Cout), Ho = (H + 2*pad - k)/stride + 1; the division must
// be exact. out(oy,ox,co) = bias[co]
//   + sum_{ky,kx,ci} in(wrap(oy*stride - pad + ky), wrap(ox*stride - pad + kx), ci)
//     * kernels(ky,kx,ci,co).
Tensor conv2d_periodic(const Tensor& input, const Tensor& kernels, int stride,
                       int pad, const Tensor& bias = Tensor());

// Depth-to-space: (H, W, C) -> (H*r, W*r, C/r^2) with
// out(y*r+dy, x*r+dx, c) = in(y, x, c*r^2 + dy*r + dx).
Tensor pixel_shuffle(const Tensor& input, int r);
// Exact inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& input, int r);

// Channels-last concatenation / slicing on (H, W, C) tensors.
Tensor channel_concat(const Tensor& a, const Tensor& b);
Tensor channel_slice(const Tensor& x, int c_begin, int c_end);

// Applies one fixed (non-trainable) k x k stencil to every channel with
// periodic wrap, k = 2m+1, unit stride:
// out(y,x,c) = sum_{di,dj in [-m,m]} in(wrap(y+di), wrap(x+dj), c) * K[di+m][dj+m].
// Offsets are added, not subtracted: this is correlation, matching stencils
// defined as functions of the neighbor offset.
Tensor stencil_apply_periodic(const Tensor& input, const std::vector<double>& kernel,
                              int k);

}  // namespace pdnet
