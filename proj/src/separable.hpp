#pragma once

// Separable 2-D building blocks shared by the DT-CWT and the DWT.

#include <array>

#include "texwave/image.hpp"
#include "texwave/wavelet.hpp"

namespace texwave::detail {

/// Edge-replicates a trailing row/column so both dimensions are even.
Plane pad_to_even(const Plane& p);
Plane crop_plane(const Plane& p, int w, int h);

/// One separable analysis step. `row` filters along x, `col` along y.
/// Returns {LL, LH, HL, HH}; the first letter is the x channel.
std::array<Plane, 4> analyze_2d(const Plane& even, const FilterPair& row, const FilterPair& col);
/// Inverse of analyze_2d.
Plane synthesize_2d(const std::array<Plane, 4>& bands, const FilterPair& row, const FilterPair& col);

void check_transform_size(const Plane& img, int levels);

}  // namespace texwave::detail
