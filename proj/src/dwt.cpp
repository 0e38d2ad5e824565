#include <string>

#include "separable.hpp"
#include "texwave/error.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

DwtPyramid dwt_forward(const Plane& img, int levels) {
  detail::check_transform_size(img, levels);
  const FilterPair& f = filter_bank().deep_stage[0];
  DwtPyramid pyr;
  pyr.levels = levels;
  Plane current = img;
  for (int level = 1; level <= levels; ++level) {
    pyr.level_input_sizes.push_back({current.width, current.height});
    auto bands = detail::analyze_2d(detail::pad_to_even(current), f, f);
    DwtLevel lv;
    lv.width = bands[0].width;
    lv.height = bands[0].height;
    // LH (low x, high y) responds to horizontal structure.
    lv.bands[static_cast<int>(DwtBand::Horizontal)] = std::move(bands[1]);
    lv.bands[static_cast<int>(DwtBand::Vertical)] = std::move(bands[2]);
    lv.bands[static_cast<int>(DwtBand::Diagonal)] = std::move(bands[3]);
    pyr.detail.push_back(std::move(lv));
    current = std::move(bands[0]);
  }
  pyr.lowpass = std::move(current);
  return pyr;
}

Plane dwt_inverse(const DwtPyramid& pyr) {
  if (pyr.levels < 1 || pyr.detail.size() != static_cast<std::size_t>(pyr.levels) ||
      pyr.level_input_sizes.size() != static_cast<std::size_t>(pyr.levels)) {
    throw Error(ErrorKind::Shape, "dwt_inverse: pyramid structure is inconsistent");
  }
  const FilterPair& f = filter_bank().deep_stage[0];
  Plane current = pyr.lowpass;
  for (int level = pyr.levels; level >= 1; --level) {
    const DwtLevel& lv = pyr.detail[level - 1];
    const auto [in_w, in_h] = pyr.level_input_sizes[level - 1];
    if (current.width != lv.width || current.height != lv.height || lv.width != (in_w + 1) / 2 ||
        lv.height != (in_h + 1) / 2) {
      throw Error(ErrorKind::Shape, "dwt_inverse: shape mismatch at level " + std::to_string(level));
    }
    const std::array<Plane, 4> bands = {current, lv.bands[0], lv.bands[1], lv.bands[2]};
    current = detail::crop_plane(detail::synthesize_2d(bands, f, f), in_w, in_h);
  }
  return current;
}

}  // namespace texwave
