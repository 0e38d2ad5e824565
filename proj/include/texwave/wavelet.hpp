#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "texwave/image.hpp"

namespace texwave {

using Coeffs = std::vector<double>;

/// Analysis lowpass/highpass pair of one tree at one stage. Synthesis uses the
/// same filters (the bank is orthonormal).
struct FilterPair {
  Coeffs low;
  Coeffs high;
};

/// How the imaginary-tree filters are derived from the real-tree ones.
enum class TreeBRule {
  ReverseNegate,         // every tree-B filter is the negated reversal
  ReverseLowpassOnly,    // lowpass: reversal; highpass: negated reversal
};

std::string to_string(TreeBRule rule);

/// Filter bank built from the published four-decimal coefficient rows.
///
/// `*_low` / `*_high` hold the rows exactly as published. The working filters
/// (`first_stage`, `deep_stage`) are derived from the published lowpass rows:
/// each is refined to the nearest exactly orthonormal filter on the same
/// support, its highpass partner is the alternating flip, and tree B is built
/// by `tree_b_rule`. The published "high" rows coincide with the tree-B
/// lowpass filters under reversal.
struct FilterBank {
  std::array<double, 10> farras_low{};
  std::array<double, 10> farras_high{};
  std::array<double, 10> kingsbury_low{};
  std::array<double, 10> kingsbury_high{};

  TreeBRule tree_b_rule = TreeBRule::ReverseLowpassOnly;

  /// Level-1 filters for tree A and tree B (Kingsbury rows, one-sample offset).
  std::array<FilterPair, 2> first_stage;
  /// Level >= 2 filters for tree A and tree B (Farras rows, quarter-shift pair).
  std::array<FilterPair, 2> deep_stage;

  std::size_t filter_length() const noexcept { return 10; }
};

/// The constant bank. Computed once; safe to share.
const FilterBank& filter_bank();
/// Builds a fresh bank (exposed for tests of the construction itself).
FilterBank make_filter_bank();

/// Nearest orthonormal, DC-normalized filter to `published` that keeps its
/// zero taps at zero (Gauss-Newton with minimum-norm steps).
Coeffs refine_orthonormal(std::span<const double> published);
/// g[n] = (-1)^n h[N-1-n].
Coeffs alternating_flip(std::span<const double> h);
Coeffs reversed(std::span<const double> h);

struct Analysis1d {
  Coeffs approx;
  Coeffs detail;
};

/// Tap index aligned with the output sample: the largest even number <= taps/2.
constexpr int filter_origin(std::size_t taps) { return static_cast<int>(taps / 2) & ~1; }

/// Two-channel analysis with periodic extension:
/// y[k] = sum_n f[n] x[(2k + filter_origin - n) mod N].
/// Throws Error(Size) for odd lengths or signals shorter than the filter.
Analysis1d analysis_1d(std::span<const double> signal, std::span<const double> low,
                       std::span<const double> high);
/// Adjoint of analysis_1d; the exact inverse for an orthonormal pair.
Coeffs synthesis_1d(std::span<const double> approx, std::span<const double> detail,
                    std::span<const double> low, std::span<const double> high);

inline constexpr std::array<int, 6> kOrientationDegrees = {-75, -45, -15, 15, 45, 75};

struct ComplexSubband {
  int level = 0;           // 1-based
  int orientation = 0;     // degrees, one of kOrientationDegrees
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> coeffs;

  std::complex<double> at(int x, int y) const { return coeffs[static_cast<std::size_t>(y) * width + x]; }
};

/// Tree order used for the four separable real trees: (row filter tree, column filter tree).
enum TreeIndex { kTreeAA = 0, kTreeAB = 1, kTreeBA = 2, kTreeBB = 3 };

struct DtcwtPyramid {
  int levels = 0;
  /// Level-major, orientations in kOrientationDegrees order.
  std::vector<ComplexSubband> subbands;
  /// Final lowpass residue of each of the four trees.
  std::array<Plane, 4> lowpass;
  /// Unpadded width/height of the image fed into each level.
  std::vector<std::array<int, 2>> level_input_sizes;
  TreeBRule tree_b_rule = TreeBRule::ReverseLowpassOnly;

  const ComplexSubband& subband(int level, int orientation_deg) const;
  ComplexSubband& subband(int level, int orientation_deg);
};

/// Smallest accepted side length for a transform of the given depth: the
/// deepest level must still see at least one filter length of samples.
int min_transform_side(int levels);

DtcwtPyramid dtcwt_forward(const Plane& img, int levels);
inline DtcwtPyramid dtcwt_forward(const GrayImage& img, int levels) {
  return dtcwt_forward(img.plane(), levels);
}
Plane dtcwt_inverse(const DtcwtPyramid& pyr);

enum class DwtBand { Horizontal = 0, Vertical = 1, Diagonal = 2 };

struct DwtLevel {
  int width = 0;
  int height = 0;
  std::array<Plane, 3> bands;  // indexed by DwtBand
};

struct DwtPyramid {
  int levels = 0;
  std::vector<DwtLevel> detail;
  Plane lowpass;
  std::vector<std::array<int, 2>> level_input_sizes;
};

/// Separable real DWT with the Farras tree-A pair at every level.
DwtPyramid dwt_forward(const Plane& img, int levels);
inline DwtPyramid dwt_forward(const GrayImage& img, int levels) { return dwt_forward(img.plane(), levels); }
Plane dwt_inverse(const DwtPyramid& pyr);

}  // namespace texwave
