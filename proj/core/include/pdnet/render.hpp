#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdnet/grid.hpp"
#include "pdnet/trainer.hpp"

namespace pdnet {

// Binary 8-bit grayscale image (PGM P5).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top

  std::uint8_t& at(int row, int col) { return pixels[row * width + col]; }
  std::uint8_t at(int row, int col) const { return pixels[row * width + col]; }
};

void write_pgm(const GrayImage& img, const std::string& path);
GrayImage read_pgm(const std::string& path);

// Min-max normalizes one channel to 8-bit grayscale (grid row 0 at the top)
// and writes `path` plus a sidecar `path + ".txt"` recording the channel and
// the min/max used. A constant field renders as all-128 mid-gray, noted in
// the sidecar.
void render_field(const Field& field, int channel, const std::string& path);

// Loss-history line plot (log10 total loss vs epoch) as a PGM raster with
// the axis ranges in the sidecar. Width/height are clamped to >= 16.
void render_loss_curve(const std::vector<EpochStats>& history, const std::string& path,
                       int width = 600, int height = 400);

}  // namespace pdnet
