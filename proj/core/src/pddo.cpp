#include "pdnet/pddo.hpp"

#include <cmath>
#include <sstream>

#include "binio.hpp"
#include "pdnet/ops.hpp"

namespace pdnet {

namespace {

// Basis P(xi) = (1, xi1, xi2, xi1^2, xi2^2, xi1*xi2).
std::array<double, 6> basis(double xi1, double xi2) {
  return {1.0, xi1, xi2, xi1 * xi1, xi2 * xi2, xi1 * xi2};
}

using Mat6 = std::array<std::array<double, 6>, 6>;

// Dense LU with partial pivoting for the 6x6 moment system.
struct Lu6 {
  Mat6 lu{};
  std::array<int, 6> perm{};
  bool singular = false;
};

Lu6 factorize(const Mat6& a) {
  Lu6 f;
  f.lu = a;
  for (int i = 0; i < 6; ++i) f.perm[i] = i;
  for (int col = 0; col < 6; ++col) {
    int pivot = col;
    double best = std::abs(f.lu[col][col]);
    for (int r = col + 1; r < 6; ++r) {
      if (std::abs(f.lu[r][col]) > best) {
        best = std::abs(f.lu[r][col]);
        pivot = r;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      return f;
    }
    if (pivot != col) {
      std::swap(f.lu[pivot], f.lu[col]);
      std::swap(f.perm[pivot], f.perm[col]);
    }
    for (int r = col + 1; r < 6; ++r) {
      f.lu[r][col] /= f.lu[col][col];
      for (int c = col + 1; c < 6; ++c) f.lu[r][c] -= f.lu[r][col] * f.lu[col][c];
    }
  }
  return f;
}

std::array<double, 6> lu_solve(const Lu6& f, const std::array<double, 6>& rhs) {
  std::array<double, 6> x{};
  for (int i = 0; i < 6; ++i) x[i] = rhs[f.perm[i]];
  for (int i = 1; i < 6; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu[i][j] * x[j];
  for (int i = 5; i >= 0; --i) {
    for (int j = i + 1; j < 6; ++j) x[i] -= f.lu[i][j] * x[j];
    x[i] /= f.lu[i][i];
  }
  return x;
}

double norm1(const Mat6& a) {
  double best = 0.0;
  for (int c = 0; c < 6; ++c) {
    double s = 0.0;
    for (int r = 0; r < 6; ++r) s += std::abs(a[r][c]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

const char* deriv_name(Deriv d) {
  switch (d) {
    case Deriv::d00: return "00";
    case Deriv::d10: return "10";
    case Deriv::d01: return "01";
    case Deriv::d20: return "20";
    case Deriv::d02: return "02";
    case Deriv::d11: return "11";
  }
  return "??";
}

double weight(double xi_norm, double delta) {
  if (!(delta > 0.0)) throw ConfigError("weight: horizon delta must be positive");
  double r = xi_norm / delta;
  return std::exp(-4.0 * r * r);
}

Family build_family(int m, double dx, double horizon_factor) {
  if (m < 1) throw ConfigError("build_family: m must be >= 1, got " + std::to_string(m));
  if (!(dx > 0.0)) throw ConfigError("build_family: dx must be positive");
  if (!(horizon_factor > static_cast<double>(m))) {
    std::ostringstream os;
    os << "build_family: horizon_factor must exceed m (got factor " << horizon_factor
       << " with m " << m << ")";
    throw ConfigError(os.str());
  }
  Family fam;
  fam.m = m;
  fam.dx = dx;
  fam.delta = horizon_factor * dx;
  fam.area = dx * dx;
  fam.offsets.reserve(static_cast<std::size_t>(fam.k()) * fam.k());
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      fam.offsets.push_back({j * dx, i * dx});  // (xi1 along x, xi2 along y)
  return fam;
}

MomentMatrix build_moment_matrix(const Family& family) {
  MomentMatrix mm;
  for (const auto& xi : family.offsets) {
    double w = weight(std::hypot(xi[0], xi[1]), family.delta);
    std::array<double, 6> p = basis(xi[0], xi[1]);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) mm.a[r][c] += w * p[r] * p[c] * family.area;
  }
  for (int i = 0; i < 6; ++i) mm.b[i][i] = deriv_factorials[i];
  return mm;
}

std::array<std::array<double, 6>, 6> solve_pd_coefficients(const MomentMatrix& moments) {
  // The physical matrix mixes powers of dx and can reach condition numbers
  // ~1e8 at dx = 1/128. Symmetric diagonal equilibration A' = D A D with
  // D = diag(1/sqrt(A_ii)) removes the dx scaling exactly (the moment matrix
  // is positive definite, so A_ii > 0), and the solution maps back as
  // a = D y. Conditioning is assessed on the equilibrated system.
  std::array<double, 6> d{};
  for (int i = 0; i < 6; ++i) {
    if (!(moments.a[i][i] > 0.0))
      throw NumericError("moment matrix has a non-positive diagonal entry");
    d[i] = 1.0 / std::sqrt(moments.a[i][i]);
  }
  Mat6 scaled{};
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) scaled[r][c] = moments.a[r][c] * d[r] * d[c];

  Lu6 f = factorize(scaled);
  if (f.singular) throw NumericError("moment matrix is singular");

  // 1-norm condition estimate via the explicit inverse (6x6: cheap, robust).
  Mat6 inv{};
  for (int c = 0; c < 6; ++c) {
    std::array<double, 6> e{};
    e[c] = 1.0;
    std::array<double, 6> col = lu_solve(f, e);
    for (int r = 0; r < 6; ++r) inv[r][c] = col[r];
  }
  double cond = norm1(scaled) * norm1(inv);
  if (!(cond < 1e12)) {
    std::ostringstream os;
    os << "moment matrix too ill-conditioned: estimate " << cond << " exceeds 1e12";
    throw NumericError(os.str());
  }

  std::array<std::array<double, 6>, 6> a{};
  for (int p = 0; p < 6; ++p) {
    std::array<double, 6> rhs{};
    for (int r = 0; r < 6; ++r) rhs[r] = moments.b[r][p] * d[r];
    std::array<double, 6> y = lu_solve(f, rhs);
    for (int r = 0; r < 6; ++r) a[r][p] = y[r] * d[r];
  }

  // Residual check on the physical system.
  double bmax = 0.0, rmax = 0.0;
  for (int r = 0; r < 6; ++r)
    for (int p = 0; p < 6; ++p) {
      bmax = std::max(bmax, std::abs(moments.b[r][p]));
      double acc = -moments.b[r][p];
      for (int q = 0; q < 6; ++q) acc += moments.a[r][q] * a[q][p];
      rmax = std::max(rmax, std::abs(acc));
    }
  if (rmax > 1e-10 * bmax) {
    std::ostringstream os;
    os << "moment solve residual " << rmax << " exceeds 1e-10 * " << bmax
       << " (condition estimate " << cond << ")";
    throw NumericError(os.str());
  }
  return a;
}

DerivativeFilterSet DerivativeFilterSet::build(int m, double dx, double horizon_factor) {
  Family fam = build_family(m, dx, horizon_factor);
  MomentMatrix mm = build_moment_matrix(fam);
  auto a = solve_pd_coefficients(mm);

  DerivativeFilterSet set;
  set.m_ = m;
  set.dx_ = dx;
  set.horizon_factor_ = horizon_factor;
  int k = fam.k();
  for (int p = 0; p < 6; ++p) {
    std::vector<double> kern(static_cast<std::size_t>(k) * k);
    for (int idx = 0; idx < k * k; ++idx) {
      const auto& xi = fam.offsets[idx];
      double w = weight(std::hypot(xi[0], xi[1]), fam.delta);
      std::array<double, 6> pb = basis(xi[0], xi[1]);
      double g = 0.0;
      for (int q = 0; q < 6; ++q) g += a[q][p] * w * pb[q];
      kern[idx] = g * fam.area;
    }
    set.kernels_[p] = std::move(kern);
  }
  return set;
}

DerivativeFilterSet DerivativeFilterSet::fdm(double dx) {
  if (!(dx > 0.0)) throw ConfigError("fdm filters: dx must be positive");
  DerivativeFilterSet set;
  set.m_ = 1;
  set.dx_ = dx;
  set.horizon_factor_ = 0.0;  // marks the classical stencils
  auto at = [](std::vector<double>& kern, int i, int j) -> double& {
    return kern[static_cast<std::size_t>(i + 1) * 3 + (j + 1)];
  };
  for (int p = 0; p < 6; ++p) set.kernels_[p].assign(9, 0.0);
  at(set.kernels_[0], 0, 0) = 1.0;                       // identity
  at(set.kernels_[1], 0, 1) = 0.5 / dx;                  // d/dx: columns
  at(set.kernels_[1], 0, -1) = -0.5 / dx;
  at(set.kernels_[2], 1, 0) = 0.5 / dx;                  // d/dy: rows
  at(set.kernels_[2], -1, 0) = -0.5 / dx;
  at(set.kernels_[3], 0, 1) = 1.0 / (dx * dx);           // d2/dx2
  at(set.kernels_[3], 0, -1) = 1.0 / (dx * dx);
  at(set.kernels_[3], 0, 0) = -2.0 / (dx * dx);
  at(set.kernels_[4], 1, 0) = 1.0 / (dx * dx);           // d2/dy2
  at(set.kernels_[4], -1, 0) = 1.0 / (dx * dx);
  at(set.kernels_[4], 0, 0) = -2.0 / (dx * dx);
  for (int i : {-1, 1})                                  // d2/dxdy
    for (int j : {-1, 1}) at(set.kernels_[5], i, j) = i * j / (4.0 * dx * dx);
  return set;
}

void DerivativeFilterSet::save(const std::string& path) const {
  static const char kMagic[6] = {'P', 'D', 'F', 'L', 'T', '1'};
  binio::Writer w(path);
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(m_));
  w.f64(dx_);
  w.f64(horizon_factor_);
  for (const auto& kern : kernels_) w.f64s(kern.data(), kern.size());
  w.close();
}

DerivativeFilterSet DerivativeFilterSet::load(const std::string& path) {
  static const char kMagic[6] = {'P', 'D', 'F', 'L', 'T', '1'};
  binio::Reader r(path);
  r.magic(kMagic);
  DerivativeFilterSet set;
  set.m_ = static_cast<int>(r.u32());
  if (set.m_ < 1 || set.m_ > 64)
    throw IoError("filter file '" + path + "' has implausible m = " + std::to_string(set.m_));
  set.dx_ = r.f64();
  set.horizon_factor_ = r.f64();
  std::size_t kk = static_cast<std::size_t>(set.k()) * set.k();
  for (auto& kern : set.kernels_) {
    kern.resize(kk);
    r.f64s(kern.data(), kk);
  }
  if (!r.at_eof()) throw IoError("trailing bytes in filter file '" + path + "'");
  return set;
}

Tensor apply_derivative(const Tensor& field, const DerivativeFilterSet& filters,
                        Deriv order) {
  return stencil_apply_periodic(field, filters.kernel(order), filters.k());
}

Field apply_derivative(const Field& field, const DerivativeFilterSet& filters,
                       Deriv order) {
  double gdx = field.grid.dx();
  if (std::abs(gdx - filters.dx()) > 1e-12 * std::max(std::abs(gdx), filters.dx())) {
    std::ostringstream os;
    os << "filters built for dx = " << filters.dx() << " applied to grid with dx = " << gdx;
    throw ConfigError(os.str());
  }
  Tensor in({field.grid.n, field.grid.n, field.channels}, field.data);
  Tensor out = apply_derivative(in, filters, order);
  Field result(field.grid, field.channels, field.t);
  result.data = out.vec();
  return result;
}

FieldSequence temporal_derivative(const FieldSequence& seq) {
  validate_sequence(seq);
  int t = seq.steps();
  if (t < 3) throw ShapeError("temporal_derivative needs at least 3 steps, got " + std::to_string(t));
  if (!(seq.dt > 0.0)) throw ConfigError("temporal_derivative: dt must be positive");
  FieldSequence out;
  out.dt = seq.dt;
  out.fields.reserve(t - 2);
  double inv2dt = 1.0 / (2.0 * seq.dt);
  for (int k = 0; k + 2 < t; ++k) {
    Field f(seq[k].grid, seq[k].channels, seq[k + 1].t);
    for (std::size_t i = 0; i < f.data.size(); ++i)
      f.data[i] = (seq[k + 2].data[i] - seq[k].data[i]) * inv2dt;
    out.fields.push_back(std::move(f));
  }
  return out;
}

std::vector<Tensor> temporal_derivative(const std::vector<Tensor>& seq, double dt) {
  if (seq.size() < 3)
    throw ShapeError("temporal_derivative needs at least 3 steps, got " +
                     std::to_string(seq.size()));
  if (!(dt > 0.0)) throw ConfigError("temporal_derivative: dt must be positive");
  std::vector<Tensor> out;
  out.reserve(seq.size() - 2);
  for (std::size_t k = 0; k + 2 < seq.size(); ++k)
    out.push_back(scale(sub(seq[k + 2], seq[k]), 1.0 / (2.0 * dt)));
  return out;
}

OrthogonalityReport check_orthogonality(const DerivativeFilterSet& filters, double tol) {
  // Reconstruct the family geometry; kernels already include the area factor.
  int m = filters.m();
  int k = filters.k();
  double dx = filters.dx();
  OrthogonalityReport rep;
  for (int n = 0; n < 6; ++n) {
    int n1 = deriv_powers[n][0], n2 = deriv_powers[n][1];
    for (int p = 0; p < 6; ++p) {
      const auto& kern = filters.kernel(static_cast<Deriv>(p));
      double acc = 0.0;
      for (int i = -m; i <= m; ++i) {
        for (int j = -m; j <= m; ++j) {
          double xi1 = j * dx, xi2 = i * dx;
          double mono = std::pow(xi1, n1) * std::pow(xi2, n2);
          acc += mono * kern[static_cast<std::size_t>(i + m) * k + (j + m)];
        }
      }
      acc /= deriv_factorials[n];
      double expect = (n == p) ? 1.0 : 0.0;
      double defect = std::abs(acc - expect);
      if (defect > rep.max_defect) {
        rep.max_defect = defect;
        rep.worst_n = n;
        rep.worst_p = p;
      }
    }
  }
  rep.pass = rep.max_defect <= tol;
  return rep;
}

}  // namespace pdnet
