#pragma once

#include <gsr/core/error.hpp>

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace gsr::netpbm {

// Decoded binary portable graymap/pixmap. Samples are widened to 16 bits;
// channels is 1 for P5 and 3 for P6.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace detail {

class HeaderReader {
 public:
  HeaderReader(const std::string& path, const std::vector<std::uint8_t>& bytes)
      : path_(path), bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1 << 20) throw FormatError(path_, start, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) throw FormatError(path_, start, std::string("expected ") + what);
    return static_cast<int>(v);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& path_;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Image decode(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(path, 0, "expected binary netpbm magic P5 or P6");
  }
  Image img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  detail::HeaderReader r(path, bytes);
  r.advance(2);
  img.width = r.read_uint("width");
  img.height = r.read_uint("height");
  img.maxval = r.read_uint("maxval");
  if (img.width <= 0 || img.height <= 0) throw FormatError(path, r.pos(), "empty image");
  if (img.maxval <= 0 || img.maxval > 65535) throw FormatError(path, r.pos(), "maxval out of range");
  if (r.pos() >= bytes.size() || !std::isspace(bytes[r.pos()])) {
    throw FormatError(path, r.pos(), "expected single whitespace after header");
  }
  r.advance(1);
  const std::size_t bps = img.maxval > 255 ? 2 : 1;
  const std::size_t count = std::size_t(img.width) * img.height * img.channels;
  const std::size_t need = count * bps;
  if (bytes.size() - r.pos() < need) {
    throw FormatError(path, bytes.size(),
                      "truncated raster: expected " + std::to_string(need) + " data bytes, found " +
                          std::to_string(bytes.size() - r.pos()));
  }
  img.samples.resize(count);
  const std::uint8_t* p = bytes.data() + r.pos();
  for (std::size_t i = 0; i < count; ++i) {
    img.samples[i] = bps == 2 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]) : p[i];
  }
  return img;
}

inline Image read(const std::string& path) { return decode(path, read_file(path)); }

inline std::vector<std::uint8_t> encode(const Image& img) {
  const std::string magic = img.channels == 1 ? "P5" : "P6";
  const std::string header = magic + "\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n" + std::to_string(img.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const bool wide = img.maxval > 255;
  for (std::uint16_t s : img.samples) {
    if (wide) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  return out;
}

inline void write(const std::string& path, const Image& img) {
  const auto bytes = encode(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace gsr::netpbm
