#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "texwave/image.hpp"
#include "texwave/preprocess.hpp"

namespace texwave {

/// Parameters of a procedural writing style. Angles are in degrees measured
/// counter-clockwise from the horizontal (0 = horizontal stroke, 90 = vertical).
struct StyleSpec {
  std::string id;
  double angle_mean = 90.0;
  double angle_spread = 15.0;  // standard deviation of the stroke angle
  double thickness = 1.5;      // pixels, >= 1
  double density = 110.0;      // strokes per 96x96 area of text
  double slant = 0.0;          // horizontal shear per pixel above the baseline
  double weight = 1.0;         // thickness multiplier

  double stroke_width() const noexcept { return thickness * weight; }
  /// Throws Error(Config) when an invariant fails.
  void validate() const;

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

/// Validates each style and checks that ids are unique and that no two styles
/// share every rendering parameter. Throws Error(Config) naming the pair.
void validate_styles(const std::vector<StyleSpec>& styles);

/// The first `count` (2..8) built-in base styles.
std::vector<StyleSpec> builtin_styles(int count);

/// Emphasis variants of a base style: regular, italic, bold, bold-italic.
/// Ids become "<base>-<emphasis>".
std::vector<StyleSpec> emphasis_variants(const StyleSpec& base);
inline constexpr const char* kEmphasisNames[4] = {"regular", "italic", "bold", "bolditalic"};

enum class NoiseRegime { None, Low, High };

const char* to_string(NoiseRegime r) noexcept;
/// "none" | "low" | "high"; throws Error(Config) otherwise.
NoiseRegime parse_noise_regime(const std::string& name);

struct NoiseSpec {
  NoiseRegime regime = NoiseRegime::None;
  double sigma = 0.05;        // low: additive Gaussian deviation
  int iterations = 10;        // high: copy generations
  double blur_sigma = 0.55;   // high: Gaussian blur per generation
  double grain = 0.03;        // high: additive noise before re-thresholding
  int levels = 32;            // high: quantization levels
  double jitter = 0.06;       // high: per-generation threshold jitter
  double contrast = 4.0;      // high: slope of the re-threshold around 0.5
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic page: white paper with margins and lines of pseudo-glyphs.
/// Throws Error(Size) below 192x192.
GrayImage render_page(const StyleSpec& style, int width, int height, std::uint64_t seed);

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec);

/// 10 log10(mean(clean^2) / mean((noisy - clean)^2)); +inf when identical.
double snr_db(const GrayImage& clean, const GrayImage& noisy);

/// Seed of page `page_index` of style `style_id`:
/// mix_seed(mix_seed(base, fnv1a64(style_id)), page_index).
std::uint64_t page_seed(std::uint64_t base, const std::string& style_id, int page_index);
std::uint64_t fnv1a64(const std::string& s) noexcept;

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::string label;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetOptions {
  int pages_per_style = 4;
  int page_width = 384;
  int page_height = 384;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Writes pages/<id>-<k>.pgm and manifest.txt under `out_dir` and returns the
/// manifest rows (style-major). Throws Error(Io) when the directory is not
/// writable.
std::vector<ManifestEntry> gen_dataset(const std::vector<StyleSpec>& styles, const DatasetOptions& opt,
                                       const std::filesystem::path& out_dir);

/// `relative/path.pgm,label` lines, LF terminated, no header.
std::string format_manifest(const std::vector<ManifestEntry>& rows);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

struct CollageRegion {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  int style = 0;  // index into the style list
};

/// Per-block ground truth; `label[i] < 0` marks a block straddling a region
/// boundary.
struct CollageTruth {
  int columns = 0;
  int rows = 0;
  std::vector<int> label;
};

struct Collage {
  GrayImage page;
  std::vector<CollageRegion> regions;
};

/// Renders each region in its style. Throws Error(Config) when the regions do
/// not tile the page exactly, when fewer than two are given, or when a style
/// index is out of range.
Collage make_collage(const std::vector<StyleSpec>& styles, int width, int height,
                     const std::vector<CollageRegion>& regions, std::uint64_t seed);

/// `columns` side-by-side regions of near-equal width; region i uses style i.
std::vector<CollageRegion> split_layout(int width, int height, int columns);

CollageTruth collage_truth(const std::vector<CollageRegion>& regions, int width, int height,
                           const BlockGridConfig& cfg);

}  // namespace texwave
