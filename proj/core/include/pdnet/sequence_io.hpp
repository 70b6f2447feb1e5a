#pragma once

#include <string>

#include "pdnet/grid.hpp"

namespace pdnet {

// Binary sequence container, magic "PDSEQ1". Layout, all little-endian:
//   bytes 0-5   ASCII "PDSEQ1"
//   bytes 6-7   reserved, zero
//   u32 T, H, W, C
//   f64 t0, dt
//   T*H*W*C f64 payload in (t, row, col, channel) order
// Fixed header is 40 bytes; total size 40 + 8*T*H*W*C.
void write_sequence(const FieldSequence& seq, const std::string& path);

// Grid bounds are not stored in the file; callers supply the domain the
// sequence lives on (defaults to the unit square).
FieldSequence read_sequence(const std::string& path, double x_min = 0.0,
                            double x_max = 1.0);

}  // namespace pdnet
