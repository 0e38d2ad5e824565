#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace texwave {

/// Row-major real array with no range constraint. Wavelet reconstructions and
/// intermediate filter outputs live here.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0);
  Plane(int w, int h, std::vector<double> values);

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const noexcept { return data.size(); }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Grey-level page or block. Intensities are in [0, 1]; 1 is white paper.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 1.0);
  /// Throws Error(Shape) on size mismatch and Error(Config) on values outside [0, 1].
  GrayImage(int width, int height, std::vector<double> pixels);
  /// Clamps every value into [0, 1].
  static GrayImage clamped(const Plane& plane);

  int width() const noexcept { return plane_.width; }
  int height() const noexcept { return plane_.height; }
  double at(int x, int y) const { return plane_.at(x, y); }
  std::span<const double> pixels() const noexcept { return plane_.data; }
  const Plane& plane() const noexcept { return plane_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Plane plane_;
};

/// Binarized image; true marks ink.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  bool at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t ink_count() const;
};

/// Parses a binary "P5" graymap. Samples are scaled by 1/maxval.
GrayImage load_pgm(std::span<const std::uint8_t> bytes);
/// Serializes as 8-bit P5 with maxval 255, rounding half up.
std::vector<std::uint8_t> save_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

/// Exact sub-rectangle; throws Error(Bounds) when it leaves the image.
GrayImage crop(const GrayImage& img, int x, int y, int w, int h);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace texwave
