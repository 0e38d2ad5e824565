#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "texwave/error.hpp"
#include "texwave/features.hpp"
#include "texwave/preprocess.hpp"
#include "texwave/synth.hpp"

using namespace texwave;

namespace {

// Mean and population variance of |c| over a subband, computed directly.
std::pair<double, double> moments(const std::vector<std::complex<double>>& c) {
  double m = 0;
  for (auto v : c) m += std::abs(v);
  m /= static_cast<double>(c.size());
  double var = 0;
  for (auto v : c) var += (std::abs(v) - m) * (std::abs(v) - m);
  return {m, var / static_cast<double>(c.size())};
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<std::vector<double>> text_block_features(const StyleSpec& s, int pages, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  for (int p = 0; p < pages; ++p) {
    const PageBlocks pb = page_blocks(render_page(s, 384, 384, mix_seed(seed, p)), BlockGridConfig{});
    for (std::size_t i = 0; i < pb.blocks.size(); ++i) {
      if (!pb.empty[i]) out.push_back(extract_features(pb.blocks[i].pixels).values);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("layout") {
  FeatureLayout def;
  CHECK(def.dimension() == 36);
  CHECK(def.tag() == "L-major/orient[-75,-45,-15,15,45,75]/stat[mean,var]");
  FeatureLayout dwt{Transform::Dwt, 3};
  CHECK(dwt.dimension() == 18);
  CHECK(dwt.tag() == "L-major/orient[H,V,D]/stat[mean,var]");
  CHECK(parse_transform("dwt") == Transform::Dwt);
  CHECK_THROWS_AS(parse_transform("haar"), Error);
}

TEST_CASE("features are subband magnitude moments in layout order") {
  const Plane block = oracle::random_plane(96, 96, 12);
  const FeatureVector fv = extract_features(block);
  REQUIRE(fv.values.size() == 36);
  const DtcwtPyramid pyr = dtcwt_forward(block, 3);
  std::size_t i = 0;
  for (int l = 1; l <= 3; ++l) {
    for (int o : kOrientationDegrees) {
      const auto [m, v] = moments(pyr.subband(l, o).coeffs);
      CHECK(fv.values[i++] == doctest::Approx(m).epsilon(1e-12));
      CHECK(fv.values[i++] == doctest::Approx(v).epsilon(1e-10));
    }
  }
  for (std::size_t k = 1; k < 36; k += 2) CHECK(fv.values[k] >= 0.0);
}

TEST_CASE("zero block gives zero features") {
  for (double v : extract_features(Plane(96, 96)).values) CHECK(v == 0.0);
}

TEST_CASE("scaling the block scales means by 2 and variances by 4") {
  const Plane a = oracle::random_plane(96, 96, 3);
  Plane b = a;
  for (double& v : b.data) v *= 2;
  for (Transform t : {Transform::Dtcwt, Transform::Dwt}) {
    const auto fa = extract_features(a, {t, 3}).values;
    const auto fb = extract_features(b, {t, 3}).values;
    for (std::size_t i = 0; i < fa.size(); ++i) {
      const double factor = i % 2 == 0 ? 2.0 : 4.0;
      CHECK(std::abs(fb[i] - factor * fa[i]) <= 1e-9 * std::abs(factor * fa[i]));
    }
  }
}

TEST_CASE("dwt features have 18 entries") {
  CHECK(extract_features(oracle::random_plane(96, 96, 1), {Transform::Dwt, 3}).values.size() == 18);
}

TEST_CASE("features propagate size errors") {
  CHECK_THROWS_AS(extract_features(Plane(32, 32)), Error);
}

TEST_CASE("standardizer basics") {
  const std::vector<std::vector<double>> sym = {{1, -2, 3}, {-1, 2, -3}};
  const Standardizer s = fit_standardizer(std::span<const std::vector<double>>(sym));
  for (double m : s.mean) CHECK(m == 0.0);

  const std::vector<std::vector<double>> same(5, {0.1, 0.3, 7.0});
  const Standardizer d = fit_standardizer(std::span<const std::vector<double>>(same));
  for (double sd : d.stddev) CHECK(sd == Standardizer::kMinStd);
  for (double v : d.apply(same[0])) CHECK(v == 0.0);

  CHECK_THROWS_AS(fit_standardizer(std::span<const std::vector<double>>()), Error);
  const std::vector<std::vector<double>> mixed = {{1, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(fit_standardizer(std::span<const std::vector<double>>(mixed)), Error);
  CHECK_THROWS_AS(s.apply(std::vector<double>{1.0}), Error);
}

TEST_CASE("standardized data has zero mean and unit variance") {
  Rng rng(77);
  std::vector<std::vector<double>> data(200, std::vector<double>(8));
  for (auto& v : data) {
    for (std::size_t i = 0; i < 8; ++i) v[i] = rng.normal(3.0 * static_cast<double>(i), 0.5 + static_cast<double>(i));
  }
  const Standardizer s = fit_standardizer(std::span<const std::vector<double>>(data));
  for (std::size_t d = 0; d < 8; ++d) {
    double m = 0, var = 0;
    for (const auto& v : data) m += s.apply(v)[d];
    m /= 200;
    for (const auto& v : data) var += (s.apply(v)[d] - m) * (s.apply(v)[d] - m);
    var /= 200;
    CHECK(std::abs(m) <= 1e-9);
    CHECK(std::abs(var - 1.0) <= 1e-6);
  }
  const auto once = s.apply(data[0]);
  CHECK(s.apply(once) != once);
  CHECK(s.apply(s.mean) == std::vector<double>(8, 0.0));
  std::vector<double> back(8);
  for (std::size_t d = 0; d < 8; ++d) back[d] = once[d] * s.stddev[d] + s.mean[d];
  for (std::size_t d = 0; d < 8; ++d) CHECK(std::abs(back[d] - data[0][d]) <= 1e-9);
}

TEST_CASE("apply_standardizer checks the layout") {
  const std::vector<FeatureVector> fvs = {extract_features(oracle::random_plane(96, 96, 1)),
                                          extract_features(oracle::random_plane(96, 96, 2))};
  const Standardizer s = fit_standardizer(std::span<const FeatureVector>(fvs));
  CHECK(apply_standardizer(s, fvs[0]).values.size() == 36);
  const FeatureVector dwt = extract_features(oracle::random_plane(96, 96, 1), {Transform::Dwt, 3});
  CHECK_THROWS_AS(apply_standardizer(s, dwt), Error);
  const std::vector<FeatureVector> mixed = {fvs[0], dwt};
  CHECK_THROWS_AS(fit_standardizer(std::span<const FeatureVector>(mixed)), Error);
}

TEST_CASE("features of a text block barely move under a one-pixel shift") {
  const GrayImage page = render_page(builtin_styles(2)[0], 384, 384, 3);
  const Plane block = crop(page, 96, 96, 96, 96).plane();
  const auto f0 = extract_features(block).values;
  for (auto [sx, sy] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
    const auto f1 = extract_features(oracle::circular_shift(block, sx, sy)).values;
    std::vector<double> d(f0.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = f1[i] - f0[i];
    CHECK(norm(d) <= 0.05 * norm(f0));
  }
}

TEST_CASE("two synthetic styles are separable in feature space") {
  const auto styles = builtin_styles(3);
  const auto a = text_block_features(styles[0], 4, 1);
  const auto b = text_block_features(styles[2], 4, 2);
  REQUIRE(a.size() >= 50);
  REQUIRE(b.size() >= 50);
  std::vector<std::vector<double>> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const Standardizer s = fit_standardizer(std::span<const std::vector<double>>(all));
  std::vector<std::vector<double>> z;
  for (const auto& v : all) z.push_back(s.apply(v));
  auto dist = [&](std::size_t i, std::size_t j) {
    double d = 0;
    for (std::size_t k = 0; k < z[i].size(); ++k) d += (z[i][k] - z[j][k]) * (z[i][k] - z[j][k]);
    return std::sqrt(d);
  };
  // Mean silhouette over all blocks.
  double sil = 0;
  const std::size_t na = a.size();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool in_a = i < na;
    double own = 0, other = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j == i) continue;
      ((j < na) == in_a ? own : other) += dist(i, j);
    }
    own /= static_cast<double>((in_a ? na : z.size() - na) - 1);
    other /= static_cast<double>(in_a ? z.size() - na : na);
    sil += (other - own) / std::max(own, other);
  }
  CHECK(sil / static_cast<double>(z.size()) > 0.0);
}
