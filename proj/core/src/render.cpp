#include "pdnet/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pdnet/errors.hpp"

namespace pdnet {

void write_pgm(const GrayImage& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
    throw ShapeError("write_pgm: inconsistent image dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed on '" + path + "'");
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (!in || magic != "P5")
    throw IoError("'" + path + "' is not a binary PGM (P5) file");
  if (width <= 0 || height <= 0 || maxval != 255)
    throw IoError("'" + path + "' has unsupported PGM dimensions or depth");
  in.get();  // the single whitespace byte after the header
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("'" + path + "' is truncated");
  return img;
}

namespace {

void write_sidecar(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace

void render_field(const Field& field, int channel, const std::string& path) {
  if (channel < 0 || channel >= field.channels)
    throw ShapeError("render_field: channel " + std::to_string(channel) +
                     " out of range [0, " + std::to_string(field.channels) + ")");
  if (!field.all_finite()) throw NumericError("render_field: field is not finite");

  int n = field.grid.n;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = field.at(i, j, channel);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

  GrayImage img;
  img.width = n;
  img.height = n;
  img.pixels.resize(static_cast<std::size_t>(n) * n);
  bool constant = !(hi > lo);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = field.at(i, j, channel);
      double g = constant ? 128.0 : std::round((v - lo) / (hi - lo) * 255.0);
      img.at(i, j) = static_cast<std::uint8_t>(g);
    }
  write_pgm(img, path);

  std::ostringstream side;
  side.precision(17);
  side << "channel " << channel << "\n"
       << "min " << lo << "\n"
       << "max " << hi << "\n"
       << "t " << field.t << "\n";
  if (constant) side << "constant field: rendered as uniform mid-gray (128)\n";
  write_sidecar(path + ".txt", side.str());
}

void render_loss_curve(const std::vector<EpochStats>& history, const std::string& path,
                       int width, int height) {
  if (history.empty()) throw ShapeError("render_loss_curve: empty history");
  width = std::max(width, 16);
  height = std::max(height, 16);

  // Work in log10 of the total loss, clamping non-positive values to the
  // smallest positive entry so degenerate histories still render.
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& row : history)
    if (row.loss_total > 0.0) min_pos = std::min(min_pos, row.loss_total);
  if (!std::isfinite(min_pos)) min_pos = 1e-300;
  std::vector<double> ys;
  ys.reserve(history.size());
  for (const auto& row : history)
    ys.push_back(std::log10(std::max(row.loss_total, min_pos)));
  double y_lo = *std::min_element(ys.begin(), ys.end());
  double y_hi = *std::max_element(ys.begin(), ys.end());
  if (!(y_hi > y_lo)) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }

  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 255);

  auto col_of = [&](std::size_t i) {
    if (history.size() == 1) return width / 2;
    return static_cast<int>(std::round(static_cast<double>(i) /
                                       (history.size() - 1) * (width - 1)));
  };
  auto row_of = [&](double y) {
    double frac = (y - y_lo) / (y_hi - y_lo);
    return static_cast<int>(std::round((1.0 - frac) * (height - 1)));
  };

  auto plot = [&](int r, int c) {
    if (r >= 0 && r < height && c >= 0 && c < width) img.at(r, c) = 0;
  };
  auto segment = [&](int r0, int c0, int r1, int c1) {
    int steps = std::max({std::abs(r1 - r0), std::abs(c1 - c0), 1});
    for (int s = 0; s <= steps; ++s) {
      double f = static_cast<double>(s) / steps;
      plot(static_cast<int>(std::round(r0 + f * (r1 - r0))),
           static_cast<int>(std::round(c0 + f * (c1 - c0))));
    }
  };

  int prev_r = row_of(ys[0]), prev_c = col_of(0);
  plot(prev_r, prev_c);
  for (std::size_t i = 1; i < ys.size(); ++i) {
    int r = row_of(ys[i]), c = col_of(i);
    segment(prev_r, prev_c, r, c);
    prev_r = r;
    prev_c = c;
  }
  write_pgm(img, path);

  std::ostringstream side;
  side.precision(17);
  side << "epochs " << history.front().epoch << ".." << history.back().epoch << "\n"
       << "log10_loss_total_min " << y_lo << "\n"
       << "log10_loss_total_max " << y_hi << "\n";
  write_sidecar(path + ".txt", side.str());
}

}  // namespace pdnet
