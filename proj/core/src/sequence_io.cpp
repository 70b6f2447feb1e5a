#include "pdnet/sequence_io.hpp"

#include <sstream>

#include "binio.hpp"

namespace pdnet {

static const char kMagic[6] = {'P', 'D', 'S', 'E', 'Q', '1'};

void write_sequence(const FieldSequence& seq, const std::string& path) {
  validate_sequence(seq);
  const Field& f0 = seq.fields.front();
  binio::Writer w(path);
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(seq.fields.size()));
  w.u32(static_cast<std::uint32_t>(f0.grid.n));
  w.u32(static_cast<std::uint32_t>(f0.grid.n));
  w.u32(static_cast<std::uint32_t>(f0.channels));
  w.f64(f0.t);
  w.f64(seq.dt);
  for (const Field& f : seq.fields) w.f64s(f.data.data(), f.data.size());
  w.close();
}

FieldSequence read_sequence(const std::string& path, double x_min, double x_max) {
  binio::Reader r(path);
  r.magic(kMagic);
  std::uint32_t t = r.u32(), h = r.u32(), wd = r.u32(), c = r.u32();
  double t0 = r.f64(), dt = r.f64();
  if (t == 0) throw IoError("sequence in '" + path + "' has zero steps");
  if (h != wd) {
    std::ostringstream os;
    os << "sequence in '" << path << "' is not square: " << h << "x" << wd;
    throw IoError(os.str());
  }
  Grid grid = make_grid(static_cast<int>(h), x_min, x_max);
  FieldSequence seq;
  seq.dt = dt;
  seq.fields.reserve(t);
  for (std::uint32_t k = 0; k < t; ++k) {
    Field f(grid, static_cast<int>(c), t0 + static_cast<double>(k) * dt);
    r.f64s(f.data.data(), f.data.size());
    seq.fields.push_back(std::move(f));
  }
  if (!r.at_eof()) {
    std::ostringstream os;
    os << "trailing bytes in '" << path << "' after offset " << r.offset();
    throw IoError(os.str());
  }
  return seq;
}

}  // namespace pdnet
