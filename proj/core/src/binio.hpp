#pragma once

// Private little-endian binary I/O helpers shared by the file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pdnet/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace pdnet::binio {

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed on '" + path_ + "'");
  }
  void u16(std::uint16_t v) { bytes(&v, 2); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void f64s(const double* p, std::size_t n) { bytes(p, 8 * n); }
  void magic(const char tag[6]) {
    bytes(tag, 6);
    const char pad[2] = {0, 0};
    bytes(pad, 2);
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("close failed on '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      std::ostringstream os;
      os << "unexpected end of file in '" << path_ << "' at offset " << offset_;
      throw IoError(os.str());
    }
    offset_ += n;
  }
  std::uint16_t u16() { std::uint16_t v; bytes(&v, 2); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  void f64s(double* p, std::size_t n) { bytes(p, 8 * n); }
  void magic(const char tag[6]) {
    char buf[8];
    bytes(buf, 8);
    if (std::memcmp(buf, tag, 6) != 0) {
      throw IoError("bad magic in '" + path_ + "': expected " + std::string(tag, 6));
    }
  }
  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }
  std::size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

}  // namespace pdnet::binio
