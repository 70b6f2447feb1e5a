#include "pdnet/grid.hpp"

#include <cmath>
#include <sstream>

namespace pdnet {

Grid make_grid(int n, double x_min, double x_max) {
  // Degenerate sizes stay legal: an 8x8 model has a 1x1 latent grid, and
  // every periodic operation is well defined under index wrap-around.
  if (n < 1) {
    std::ostringstream os;
    os << "grid side must be at least 1, got " << n;
    throw ConfigError(os.str());
  }
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    std::ostringstream os;
    os << "grid bounds must satisfy x_min < x_max, got [" << x_min << ", " << x_max << ")";
    throw ConfigError(os.str());
  }
  return Grid{n, x_min, x_max};
}

Field::Field(const Grid& g, int ch, double time, double fill)
    : grid(g), channels(ch), t(time),
      data(static_cast<std::size_t>(g.n) * g.n * ch, fill) {
  if (ch < 1) throw ConfigError("field must have at least one channel");
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Field sample_field(const Grid& grid, int channels,
                   const std::function<double(double, double, int)>& fn,
                   double t) {
  Field f(grid, channels, t);
  for (int i = 0; i < grid.n; ++i) {
    double y = grid.coord(i);
    for (int j = 0; j < grid.n; ++j) {
      double x = grid.coord(j);
      for (int c = 0; c < channels; ++c) {
        double v = fn(x, y, c);
        if (!std::isfinite(v)) {
          std::ostringstream os;
          os << "sampled value is not finite at (x=" << x << ", y=" << y
             << ", channel=" << c << ")";
          throw NumericError(os.str());
        }
        f.at(i, j, c) = v;
      }
    }
  }
  return f;
}

void validate_sequence(const FieldSequence& seq) {
  if (seq.fields.empty()) throw ShapeError("field sequence is empty");
  const Field& first = seq.fields.front();
  for (std::size_t k = 0; k < seq.fields.size(); ++k) {
    const Field& f = seq.fields[k];
    if (!(f.grid == first.grid) || f.channels != first.channels) {
      std::ostringstream os;
      os << "sequence step " << k << " disagrees with step 0 on grid or channels";
      throw ShapeError(os.str());
    }
    double expect = first.t + static_cast<double>(k) * seq.dt;
    if (std::abs(f.t - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
      std::ostringstream os;
      os << "sequence step " << k << " has time " << f.t << ", expected " << expect;
      throw ShapeError(os.str());
    }
  }
}

}  // namespace pdnet
