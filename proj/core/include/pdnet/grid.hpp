#pragma once

#include <functional>
#include <vector>

#include "pdnet/errors.hpp"

namespace pdnet {

// Uniform square periodic grid on [x_min, x_max)^2 with n cells per side.
// Grid point (row i, col j) sits at (x_min + j*dx, x_min + i*dx): columns
// run along x, rows along y. The right/top boundary is excluded (periodic
// wrap), so dx = (x_max - x_min) / n.
struct Grid {
  int n = 0;
  double x_min = 0.0;
  double x_max = 1.0;

  double dx() const { return (x_max - x_min) / n; }
  double extent() const { return x_max - x_min; }
  int wrap(int i) const { return ((i % n) + n) % n; }
  double coord(int idx) const { return x_min + idx * dx(); }
  bool operator==(const Grid&) const = default;
};

Grid make_grid(int n, double x_min, double x_max);

// One time slab: n x n x channels values at time t, stored row-major in
// (row, col, channel) order.
struct Field {
  Grid grid;
  int channels = 0;
  double t = 0.0;
  std::vector<double> data;

  Field() = default;
  Field(const Grid& g, int ch, double time = 0.0, double fill = 0.0);

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * grid.n + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * grid.n + col) * channels + ch];
  }
  std::size_t size() const { return data.size(); }
  double max_abs() const;
  bool all_finite() const;
};

// Time-ordered stack of fields with uniform spacing dt; fields[k].t must be
// t0 + k*dt.
struct FieldSequence {
  std::vector<Field> fields;
  double dt = 0.0;

  int steps() const { return static_cast<int>(fields.size()); }
  double t0() const { return fields.empty() ? 0.0 : fields.front().t; }
  const Field& operator[](int k) const { return fields[k]; }
  Field& operator[](int k) { return fields[k]; }
};

// Evaluates fn(x, y, channel) at every grid point. Raises NumericError naming
// the offending point if fn produces a non-finite value.
Field sample_field(const Grid& grid, int channels,
                   const std::function<double(double, double, int)>& fn,
                   double t = 0.0);

void validate_sequence(const FieldSequence& seq);

}  // namespace pdnet
