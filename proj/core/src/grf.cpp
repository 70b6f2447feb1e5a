#include <fftw3.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "pdnet/physics.hpp"

namespace pdnet {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Field sample_burgers_ic(std::uint64_t seed, const Grid& grid, double amplitude) {
  const int n = grid.n;
  if (!power_of_two(n))
    throw ConfigError("sample_burgers_ic: grid side must be a power of two, got " +
                      std::to_string(n));
  if (!std::isfinite(amplitude))
    throw ConfigError("sample_burgers_ic: amplitude must be finite");

  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Spectral filter 25/((2pi|k|)^2 + 25) on integer frequencies.
  std::vector<double> filter(cells);
  for (int ky = 0; ky < n; ++ky) {
    int fy = (ky <= n / 2) ? ky : ky - n;
    for (int kx = 0; kx < n; ++kx) {
      int fx = (kx <= n / 2) ? kx : kx - n;
      double k2 = 4.0 * M_PI * M_PI * (static_cast<double>(fx) * fx + static_cast<double>(fy) * fy);
      filter[static_cast<std::size_t>(ky) * n + kx] = 25.0 / (k2 + 25.0);
    }
  }

  fftw_complex* buf = fftw_alloc_complex(cells);
  fftw_complex* spec = fftw_alloc_complex(cells);
  fftw_plan fwd = fftw_plan_dft_2d(n, n, buf, spec, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_2d(n, n, spec, buf, FFTW_BACKWARD, FFTW_ESTIMATE);

  Field out(grid, 2, 0.0);
  // FFT of unit white noise has modes of rms n; dividing by n gives
  // unit-variance Hermitian modes u0_hat. The field is the Fourier series
  // sum_k u0_hat(k) exp(2*pi*i k.x) evaluated at the grid points, which is
  // the plain unnormalized backward transform, so the pointwise std is
  // amplitude * sqrt(sum_k filter(k)^2) ~ 1.45 * amplitude at any n.
  const double mode_norm = amplitude / n;
  for (int ch = 0; ch < 2; ++ch) {
    for (std::size_t i = 0; i < cells; ++i) {
      buf[i][0] = normal(rng);
      buf[i][1] = 0.0;
    }
    fftw_execute(fwd);
    for (std::size_t i = 0; i < cells; ++i) {
      spec[i][0] *= filter[i] * mode_norm;
      spec[i][1] *= filter[i] * mode_norm;
    }
    fftw_execute(bwd);
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      double re = buf[i][0];
      double im = buf[i][1];
      max_re = std::max(max_re, std::abs(re));
      max_im = std::max(max_im, std::abs(im));
      out.data[i * 2 + ch] = re;
    }
    if (max_im > 1e-12 * std::max(max_re, 1e-300)) {
      fftw_destroy_plan(fwd);
      fftw_destroy_plan(bwd);
      fftw_free(buf);
      fftw_free(spec);
      std::ostringstream os;
      os << "sample_burgers_ic: inverse transform lost conjugate symmetry (max imag "
         << max_im << ")";
      throw NumericError(os.str());
    }
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(buf);
  fftw_free(spec);
  return out;
}

}  // namespace pdnet
