#include <cmath>
#include <numbers>
#include <string>

#include "separable.hpp"
#include "texwave/error.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Where each orientation comes from: the separable detail band (1 = LH,
// 2 = HL, 3 = HH in analyze_2d order) and which combination of the four
// trees forms it. Sum: ((aa - bb) + i(ab + ba)) / sqrt(2).
// Difference: ((aa + bb) + i(ab - ba)) / sqrt(2).
enum class Combo { Sum, Difference };

struct BandSource {
  int band;
  Combo combo;
};

// Indexed like kOrientationDegrees. Verified against oriented gratings in
// the wavelet tests.
constexpr std::array<BandSource, 6> kSources = {{
    {2, Combo::Difference},  // -75
    {3, Combo::Difference},  // -45
    {1, Combo::Difference},  // -15
    {1, Combo::Sum},         // +15
    {3, Combo::Sum},         // +45
    {2, Combo::Sum},         // +75
}};

int orientation_index(int deg) {
  for (std::size_t i = 0; i < kOrientationDegrees.size(); ++i) {
    if (kOrientationDegrees[i] == deg) return static_cast<int>(i);
  }
  throw Error(ErrorKind::Config, "unknown orientation " + std::to_string(deg));
}

const FilterPair& stage_filters(const FilterBank& bank, int level, int tree) {
  return level == 1 ? bank.first_stage[tree] : bank.deep_stage[tree];
}

constexpr int row_tree(int t) { return t / 2; }
constexpr int col_tree(int t) { return t % 2; }

}  // namespace

int min_transform_side(int levels) { return 5 << levels; }

const ComplexSubband& DtcwtPyramid::subband(int level, int orientation_deg) const {
  if (level < 1 || level > levels) throw Error(ErrorKind::Shape, "no such level " + std::to_string(level));
  return subbands[static_cast<std::size_t>(level - 1) * 6 + orientation_index(orientation_deg)];
}

ComplexSubband& DtcwtPyramid::subband(int level, int orientation_deg) {
  return const_cast<ComplexSubband&>(std::as_const(*this).subband(level, orientation_deg));
}

DtcwtPyramid dtcwt_forward(const Plane& img, int levels) {
  detail::check_transform_size(img, levels);
  const FilterBank& bank = filter_bank();

  DtcwtPyramid pyr;
  pyr.levels = levels;
  pyr.tree_b_rule = bank.tree_b_rule;
  pyr.subbands.reserve(static_cast<std::size_t>(levels) * 6);

  std::array<Plane, 4> current;
  for (int level = 1; level <= levels; ++level) {
    const int in_w = level == 1 ? img.width : current[0].width;
    const int in_h = level == 1 ? img.height : current[0].height;
    pyr.level_input_sizes.push_back({in_w, in_h});

    std::array<std::array<Plane, 4>, 4> bands;  // [tree][LL, LH, HL, HH]
    for (int t = 0; t < 4; ++t) {
      const Plane even = detail::pad_to_even(level == 1 ? img : current[t]);
      bands[t] = detail::analyze_2d(even, stage_filters(bank, level, row_tree(t)),
                                    stage_filters(bank, level, col_tree(t)));
    }
    for (int t = 0; t < 4; ++t) current[t] = std::move(bands[t][0]);

    for (std::size_t o = 0; o < kSources.size(); ++o) {
      const BandSource src = kSources[o];
      const Plane& aa = bands[kTreeAA][src.band];
      const Plane& ab = bands[kTreeAB][src.band];
      const Plane& ba = bands[kTreeBA][src.band];
      const Plane& bb = bands[kTreeBB][src.band];
      ComplexSubband sb;
      sb.level = level;
      sb.orientation = kOrientationDegrees[o];
      sb.width = aa.width;
      sb.height = aa.height;
      sb.coeffs.resize(aa.size());
      for (std::size_t i = 0; i < aa.size(); ++i) {
        if (src.combo == Combo::Sum) {
          sb.coeffs[i] = {(aa.data[i] - bb.data[i]) * kInvSqrt2, (ab.data[i] + ba.data[i]) * kInvSqrt2};
        } else {
          sb.coeffs[i] = {(aa.data[i] + bb.data[i]) * kInvSqrt2, (ab.data[i] - ba.data[i]) * kInvSqrt2};
        }
      }
      pyr.subbands.push_back(std::move(sb));
    }
  }
  pyr.lowpass = std::move(current);
  return pyr;
}

Plane dtcwt_inverse(const DtcwtPyramid& pyr) {
  const FilterBank& bank = filter_bank();
  if (pyr.levels < 1 || pyr.subbands.size() != static_cast<std::size_t>(pyr.levels) * 6 ||
      pyr.level_input_sizes.size() != static_cast<std::size_t>(pyr.levels)) {
    throw Error(ErrorKind::Shape, "dtcwt_inverse: pyramid structure is inconsistent");
  }
  if (pyr.tree_b_rule != bank.tree_b_rule) {
    throw Error(ErrorKind::Shape, "dtcwt_inverse: pyramid built with tree-B rule " +
                                      to_string(pyr.tree_b_rule));
  }

  std::array<Plane, 4> current = pyr.lowpass;
  for (int level = pyr.levels; level >= 1; --level) {
    const auto [in_w, in_h] = pyr.level_input_sizes[level - 1];
    const int sub_w = (in_w + 1) / 2;
    const int sub_h = (in_h + 1) / 2;
    for (const Plane& p : current) {
      if (p.width != sub_w || p.height != sub_h) {
        throw Error(ErrorKind::Shape, "dtcwt_inverse: lowpass shape mismatch at level " + std::to_string(level));
      }
    }

    std::array<std::array<Plane, 4>, 4> bands;
    for (int t = 0; t < 4; ++t) {
      bands[t][0] = std::move(current[t]);
      for (int b = 1; b < 4; ++b) bands[t][b] = Plane(sub_w, sub_h);
    }
    for (std::size_t o = 0; o < kSources.size(); ++o) {
      const BandSource src = kSources[o];
      const ComplexSubband& sb = pyr.subbands[static_cast<std::size_t>(level - 1) * 6 + o];
      if (sb.width != sub_w || sb.height != sub_h || sb.coeffs.size() != static_cast<std::size_t>(sub_w) * sub_h) {
        throw Error(ErrorKind::Shape, "dtcwt_inverse: subband shape mismatch at level " + std::to_string(level));
      }
      Plane& aa = bands[kTreeAA][src.band];
      Plane& ab = bands[kTreeAB][src.band];
      Plane& ba = bands[kTreeBA][src.band];
      Plane& bb = bands[kTreeBB][src.band];
      for (std::size_t i = 0; i < sb.coeffs.size(); ++i) {
        const double re = sb.coeffs[i].real() * kInvSqrt2;
        const double im = sb.coeffs[i].imag() * kInvSqrt2;
        if (src.combo == Combo::Sum) {
          aa.data[i] += re;
          bb.data[i] -= re;
          ab.data[i] += im;
          ba.data[i] += im;
        } else {
          aa.data[i] += re;
          bb.data[i] += re;
          ab.data[i] += im;
          ba.data[i] -= im;
        }
      }
    }

    for (int t = 0; t < 4; ++t) {
      const Plane even = detail::synthesize_2d(bands[t], stage_filters(bank, level, row_tree(t)),
                                               stage_filters(bank, level, col_tree(t)));
      current[t] = detail::crop_plane(even, in_w, in_h);
    }
  }
  // Level 1 fed the same image to all four trees; average their reconstructions.
  Plane out(current[0].width, current[0].height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = 0.25 * (current[0].data[i] + current[1].data[i] + current[2].data[i] + current[3].data[i]);
  }
  return out;
}

}  // namespace texwave
