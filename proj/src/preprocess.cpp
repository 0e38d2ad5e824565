#include "texwave/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "texwave/error.hpp"

namespace texwave {

void BlockGridConfig::validate() const {
  if (block_width < 16 || block_height < 16) throw Error(ErrorKind::Config, "block dimensions must be >= 16");
  if (stride_x < 0 || stride_y < 0) throw Error(ErrorKind::Config, "stride must be >= 1");
  if (!(ink_ratio_threshold > 0.0 && ink_ratio_threshold < 1.0)) {
    throw Error(ErrorKind::Config, "ink threshold must be in (0, 1)");
  }
}

int otsu_bin(const GrayImage& img) {
  std::array<long long, 256> hist{};
  for (double v : img.pixels()) {
    const int bin = std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255);
    ++hist[bin];
  }
  if (std::count_if(hist.begin(), hist.end(), [](long long c) { return c > 0; }) < 2) {
    throw Error(ErrorKind::Degenerate, "otsu: histogram has a single occupied level");
  }
  long long total = 0;
  double total_sum = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += static_cast<double>(i) * hist[i];
  }
  long long n0 = 0;
  double s0 = 0.0;
  double best = -1.0;
  int best_k = 1;
  for (int k = 1; k < 256; ++k) {
    n0 += hist[k - 1];
    s0 += static_cast<double>(k - 1) * hist[k - 1];
    const long long n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const double m0 = s0 / static_cast<double>(n0);
    const double m1 = (total_sum - s0) / static_cast<double>(n1);
    // Between-class variance up to the constant factor 1/total^2.
    const double var = static_cast<double>(n0) * static_cast<double>(n1) * (m0 - m1) * (m0 - m1);
    if (var > best * (1.0 + 1e-12)) {
      best = var;
      best_k = k;
    }
  }
  return best_k;
}

double otsu_threshold(const GrayImage& img) { return otsu_bin(img) / 256.0; }

BinaryImage binarize(const GrayImage& img, double t) {
  BinaryImage out{img.width(), img.height(), {}};
  out.pixels.reserve(img.pixels().size());
  for (double v : img.pixels()) out.pixels.push_back(v < t ? 1 : 0);
  return out;
}

BinaryImage crop_binary(const BinaryImage& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width || y + h > img.height) {
    throw Error(ErrorKind::Bounds, "binary crop rectangle outside image");
  }
  BinaryImage out{w, h, {}};
  out.pixels.reserve(static_cast<std::size_t>(w) * h);
  for (int r = y; r < y + h; ++r) {
    const auto row = img.pixels.begin() + static_cast<std::ptrdiff_t>(r) * img.width;
    out.pixels.insert(out.pixels.end(), row + x, row + x + w);
  }
  return out;
}

int block_count(int extent, int block, int stride) {
  if (extent < block) return 0;
  return (extent - block) / stride + 1;
}

std::vector<Block> partition_blocks(const GrayImage& img, const BlockGridConfig& cfg) {
  cfg.validate();
  const int sx = cfg.effective_stride_x();
  const int sy = cfg.effective_stride_y();
  const int cols = block_count(img.width(), cfg.block_width, sx);
  const int rows = block_count(img.height(), cfg.block_height, sy);
  if (cols == 0 || rows == 0) {
    throw Error(ErrorKind::Size, "page " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                     " is smaller than one " + std::to_string(cfg.block_width) + "x" +
                                     std::to_string(cfg.block_height) + " block");
  }
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int x = c * sx;
      const int y = r * sy;
      blocks.push_back({x, y, cfg.block_width, cfg.block_height, crop(img, x, y, cfg.block_width, cfg.block_height)});
    }
  }
  return blocks;
}

bool is_empty(const BinaryImage& block_binary, double threshold) {
  const std::size_t ink = block_binary.ink_count();
  const std::size_t paper = block_binary.pixels.size() - ink;
  if (paper == 0) return false;
  return static_cast<double>(ink) / static_cast<double>(paper) < threshold;
}

PageBlocks page_blocks(const GrayImage& page, const BlockGridConfig& cfg) {
  PageBlocks out;
  out.blocks = partition_blocks(page, cfg);
  out.columns = block_count(page.width(), cfg.block_width, cfg.effective_stride_x());
  out.rows = block_count(page.height(), cfg.block_height, cfg.effective_stride_y());
  BinaryImage binary;
  bool has_ink = true;
  try {
    binary = binarize(page, otsu_threshold(page));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    has_ink = false;
  }
  out.empty.reserve(out.blocks.size());
  for (const Block& b : out.blocks) {
    out.empty.push_back(!has_ink ||
                        is_empty(crop_binary(binary, b.origin_x, b.origin_y, b.width, b.height),
                                 cfg.ink_ratio_threshold));
  }
  return out;
}

}  // namespace texwave
