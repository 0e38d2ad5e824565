#pragma once

#include <vector>

#include "texwave/image.hpp"

namespace texwave {

struct BlockGridConfig {
  int block_width = 96;
  int block_height = 96;
  int stride_x = 0;  // 0 means "equal to block_width" (non-overlapping)
  int stride_y = 0;
  double ink_ratio_threshold = 0.05;

  int effective_stride_x() const noexcept { return stride_x > 0 ? stride_x : block_width; }
  int effective_stride_y() const noexcept { return stride_y > 0 ? stride_y : block_height; }
  /// Throws Error(Config) when a field is out of range.
  void validate() const;
};

struct Block {
  int origin_x = 0;
  int origin_y = 0;
  int width = 0;
  int height = 0;
  GrayImage pixels;
};

/// Otsu threshold over a 256-bin histogram (bin = floor(256 v), clamped).
/// Returns k/256 for the smallest boundary k maximizing between-class
/// variance. Throws Error(Degenerate) when only one bin is occupied.
double otsu_threshold(const GrayImage& img);
/// Boundary index k in [1, 255] behind otsu_threshold.
int otsu_bin(const GrayImage& img);

/// Ink (true) iff intensity < t.
BinaryImage binarize(const GrayImage& img, double t);
BinaryImage crop_binary(const BinaryImage& img, int x, int y, int w, int h);

/// Number of block origins along one axis for page length `extent`.
int block_count(int extent, int block, int stride);
/// Row-major tiling; trailing partial blocks are dropped.
std::vector<Block> partition_blocks(const GrayImage& img, const BlockGridConfig& cfg);

/// True iff ink / non-ink < threshold.
bool is_empty(const BinaryImage& block_binary, double threshold);

/// Blocks of a page with their emptiness flags. The page is binarized once
/// with its own Otsu threshold; a page with a single grey level has no ink and
/// every block is empty.
struct PageBlocks {
  int columns = 0;
  int rows = 0;
  std::vector<Block> blocks;
  std::vector<bool> empty;
};

PageBlocks page_blocks(const GrayImage& page, const BlockGridConfig& cfg);

}  // namespace texwave
