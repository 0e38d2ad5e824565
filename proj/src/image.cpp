#include "texwave/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "texwave/error.hpp"

namespace texwave {

Plane::Plane(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

Plane::Plane(int w, int h, std::vector<double> values)
    : width(w), height(h), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(w) * h) {
    throw Error(ErrorKind::Shape, "plane data length does not match " + std::to_string(w) +
                                      "x" + std::to_string(h));
  }
}

GrayImage::GrayImage(int width, int height, double fill) {
  if (width < 1 || height < 1) throw Error(ErrorKind::Shape, "image dimensions must be >= 1");
  if (!(fill >= 0.0 && fill <= 1.0)) throw Error(ErrorKind::Config, "fill outside [0, 1]");
  plane_ = Plane(width, height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels) {
  if (width < 1 || height < 1) throw Error(ErrorKind::Shape, "image dimensions must be >= 1");
  plane_ = Plane(width, height, std::move(pixels));
  for (double v : plane_.data) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Config, "intensity outside [0, 1]");
  }
}

GrayImage GrayImage::clamped(const Plane& plane) {
  GrayImage out;
  out.plane_ = plane;
  for (double& v : out.plane_.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::size_t BinaryImage::ink_count() const {
  return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, "pgm: " + what + " at byte offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* field) {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) fail(std::string("oversized ") + field);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected ") + field);
    return value;
  }

  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("expected whitespace after maxval");
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  HeaderReader rd(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P') rd.fail("missing magic number");
  if (bytes[1] != '5') {
    throw Error(ErrorKind::Parse,
                "pgm: unsupported magic 'P" + std::string(1, static_cast<char>(bytes[1])) +
                    "' at byte offset 0");
  }
  // Skip the two magic bytes.
  HeaderReader body(bytes.subspan(2));
  const long width = body.number("width");
  const long height = body.number("height");
  const long maxval = body.number("maxval");
  body.single_space();
  const std::size_t header_len = 2 + body.offset();
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::Parse, "pgm: zero dimension in header ending at byte offset " +
                                      std::to_string(header_len));
  }
  if (maxval < 1 || maxval > 65535) {
    throw Error(ErrorKind::Parse, "pgm: maxval out of range ending at byte offset " +
                                      std::to_string(header_len));
  }
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = header_len + count * sample_bytes;
  if (bytes.size() < need) {
    throw Error(ErrorKind::Parse, "pgm: truncated payload, data ends at byte offset " +
                                      std::to_string(bytes.size()) + " but " +
                                      std::to_string(need) + " bytes are required");
  }
  std::vector<double> pixels(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  const std::uint8_t* p = bytes.data() + header_len;
  for (std::size_t i = 0; i < count; ++i) {
    unsigned v = sample_bytes == 1 ? p[i] : (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
    if (v > static_cast<unsigned>(maxval)) {
      throw Error(ErrorKind::Parse, "pgm: sample exceeds maxval at byte offset " +
                                        std::to_string(header_len + i * sample_bytes));
    }
    pixels[i] = v * scale;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img) {
  const std::string header = "P5 " + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + " 255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.pixels().size());
  for (double v : img.pixels()) {
    out.push_back(static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)));
  }
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
  try {
    return load_pgm(read_bytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
  write_bytes(path, save_pgm(img));
}

GrayImage crop(const GrayImage& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height()) {
    throw Error(ErrorKind::Bounds, "crop rectangle (" + std::to_string(x) + "," + std::to_string(y) +
                                       "," + std::to_string(w) + "," + std::to_string(h) +
                                       ") outside " + std::to_string(img.width()) + "x" +
                                       std::to_string(img.height()) + " image");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * h);
  for (int r = y; r < y + h; ++r) {
    for (int c = x; c < x + w; ++c) out.push_back(img.at(c, r));
  }
  return GrayImage(w, h, std::move(out));
}

}  // namespace texwave
