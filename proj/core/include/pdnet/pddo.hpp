#pragma once

#include <array>
#include <string>
#include <vector>

#include "pdnet/grid.hpp"
#include "pdnet/tensor.hpp"

namespace pdnet {

// Derivative orders carried by a filter set, identified by the power pair
// (p1, p2) = (d/dx, d/dy) exponents.
enum class Deriv { d00 = 0, d10 = 1, d01 = 2, d20 = 3, d02 = 4, d11 = 5 };

inline constexpr std::array<std::array<int, 2>, 6> deriv_powers{
    {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}};
inline constexpr std::array<double, 6> deriv_factorials{1, 1, 1, 2, 2, 1};
const char* deriv_name(Deriv d);

inline constexpr int kDefaultFilterHalfWidth = 2;
inline constexpr double kDefaultHorizonFactor = 3.015;

// Gaussian influence weight exp(-4 |xi|^2 / delta^2).
double weight(double xi_norm, double delta);

// The square neighborhood of one grid point: relative offsets in physical
// units, per-member cell areas, and the horizon used by the weight.
struct Family {
  int m = 0;
  double dx = 0.0;
  double delta = 0.0;
  // offsets[idx] = (xi1, xi2) = (j*dx, i*dx), idx = (i+m)*(2m+1) + (j+m):
  // xi1 runs along x (columns), xi2 along y (rows).
  std::vector<std::array<double, 2>> offsets;
  double area = 0.0;  // dx^2, shared by every member

  int k() const { return 2 * m + 1; }
};

Family build_family(int m, double dx, double horizon_factor);

// Weighted moment system A a = b over the 6-term basis
// P(xi) = (1, xi1, xi2, xi1^2, xi2^2, xi1*xi2).
struct MomentMatrix {
  std::array<std::array<double, 6>, 6> a{};  // A[r][c]
  std::array<std::array<double, 6>, 6> b{};  // diag(1,1,1,2,2,1)
};

MomentMatrix build_moment_matrix(const Family& family);

// Columns of the result are the coefficient vectors a^{p} per derivative
// order. Uses diagonal equilibration plus 6x6 LU with partial pivoting;
// throws NumericError carrying the condition estimate when it exceeds 1e12
// or the post-solve residual check fails.
std::array<std::array<double, 6>, 6> solve_pd_coefficients(const MomentMatrix& moments);

// Six dense (2m+1)^2 stencils; entry for offset xi_j is g^{p}(xi_j) * A_j,
// so applying one is a plain (periodic, unflipped) cross-correlation.
class DerivativeFilterSet {
 public:
  static DerivativeFilterSet build(int m, double dx, double horizon_factor);
  // Classical 5-point/cross finite-difference stencils on a 3x3 footprint,
  // used by the reference solver's FDM mode.
  static DerivativeFilterSet fdm(double dx);

  int m() const { return m_; }
  int k() const { return 2 * m_ + 1; }
  double dx() const { return dx_; }
  double horizon_factor() const { return horizon_factor_; }
  const std::vector<double>& kernel(Deriv d) const {
    return kernels_[static_cast<int>(d)];
  }

  void save(const std::string& path) const;
  static DerivativeFilterSet load(const std::string& path);

  bool operator==(const DerivativeFilterSet&) const = default;

 private:
  int m_ = 0;
  double dx_ = 0.0;
  double horizon_factor_ = 0.0;
  std::array<std::vector<double>, 6> kernels_;
};

// Channelwise periodic cross-correlation with the selected kernel. The
// tensor form participates in autodiff; the Field form requires the field's
// grid spacing to match the filter construction spacing.
Tensor apply_derivative(const Tensor& field, const DerivativeFilterSet& filters, Deriv order);
Field apply_derivative(const Field& field, const DerivativeFilterSet& filters, Deriv order);

// Central difference in time: out_k = (in_{k+2} - in_k) / (2 dt), one output
// per interior step, timestamped t_{k+1}.
FieldSequence temporal_derivative(const FieldSequence& seq);
std::vector<Tensor> temporal_derivative(const std::vector<Tensor>& seq, double dt);

struct OrthogonalityReport {
  double max_defect = 0.0;
  int worst_n = 0;  // flattened (n1,n2) basis index of the worst pair
  int worst_p = 0;
  bool pass = false;
};

// Verifies the discrete orthogonality identities
// (1/(n1! n2!)) sum_j xi1^n1 xi2^n2 g^{p}(xi_j) A_j = delta_{n p}
// for all 36 (n, p) pairs.
OrthogonalityReport check_orthogonality(const DerivativeFilterSet& filters,
                                        double tol = 1e-9);

}  // namespace pdnet
