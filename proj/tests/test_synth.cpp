#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "texwave/error.hpp"
#include "texwave/features.hpp"
#include "texwave/pipeline.hpp"
#include "texwave/synth.hpp"

using namespace texwave;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("texwave_test_" + name);
  fs::remove_all(p);
  return p;
}

double ink_ratio(const GrayImage& page) {
  const BinaryImage b = binarize(page, otsu_threshold(page));
  return static_cast<double>(b.ink_count()) / static_cast<double>(b.pixels.size());
}

std::vector<std::vector<double>> text_blocks(const StyleSpec& s, int want, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  for (int k = 0; static_cast<int>(out.size()) < want; ++k) {
    const PageFeatures pf = page_features(render_page(s, 384, 384, seed + k), BlockGridConfig{}, FeatureLayout{});
    for (const auto& f : pf.features) {
      if (static_cast<int>(out.size()) < want) out.push_back(f);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("rendering is deterministic") {
  const StyleSpec s = builtin_styles(2)[0];
  CHECK(save_pgm(render_page(s, 256, 200, 9)) == save_pgm(render_page(s, 256, 200, 9)));
  CHECK(!(render_page(s, 256, 200, 9) == render_page(s, 256, 200, 10)));
  CHECK_THROWS_AS(render_page(s, 191, 400, 1), Error);
}

TEST_CASE("ink ratio of rendered pages") {
  std::vector<StyleSpec> styles = builtin_styles(8);
  for (const auto& v : emphasis_variants(styles[0])) styles.push_back(v);
  for (const StyleSpec& s : styles) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const double r = ink_ratio(render_page(s, 384, 384, seed));
      CHECK(r >= 0.02);
      CHECK(r <= 0.40);
    }
  }
}

TEST_CASE("styles differing only in slant are separable on one feature") {
  StyleSpec upright = builtin_styles(2)[0];
  StyleSpec slanted = upright;
  slanted.id = "slanted";
  slanted.slant = 0.2;
  const auto a = text_blocks(upright, 50, 100);
  const auto b = text_blocks(slanted, 50, 200);
  double best = 0;
  for (std::size_t d = 0; d < a[0].size(); ++d) {
    double ma = 0, mb = 0;
    for (const auto& v : a) ma += v[d] / a.size();
    for (const auto& v : b) mb += v[d] / b.size();
    double va = 0, vb = 0;
    for (const auto& v : a) va += (v[d] - ma) * (v[d] - ma) / a.size();
    for (const auto& v : b) vb += (v[d] - mb) * (v[d] - mb) / b.size();
    const double within = std::max(std::sqrt(va), std::sqrt(vb));
    if (within > 0) best = std::max(best, std::abs(ma - mb) / within);
  }
  CHECK(best > 3.0);
}

TEST_CASE("noise regimes") {
  const GrayImage page = render_page(builtin_styles(2)[1], 256, 256, 4);
  NoiseSpec none;
  CHECK(apply_noise(page, none) == page);

  NoiseSpec low;
  low.regime = NoiseRegime::Low;
  low.seed = 5;
  const GrayImage gray(256, 256, 0.5);
  const GrayImage noisy = apply_noise(gray, low);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < noisy.pixels().size(); ++i) {
    const double d = noisy.pixels()[i] - 0.5;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(noisy.pixels().size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - 0.05) <= 0.005);

  NoiseSpec high;
  high.regime = NoiseRegime::High;
  high.seed = 5;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const GrayImage p = render_page(builtin_styles(8)[seed * 2], 256, 256, seed);
    const double s_none = snr_db(p, apply_noise(p, none));
    const double s_low = snr_db(p, apply_noise(p, low));
    const double s_high = snr_db(p, apply_noise(p, high));
    CHECK(std::isinf(s_none));
    CHECK(s_none > s_low);
    CHECK(s_low > s_high);
  }
  CHECK(apply_noise(page, high) == apply_noise(page, high));
  CHECK_THROWS_AS(parse_noise_regime("medium"), Error);
}

TEST_CASE("style validation") {
  CHECK_NOTHROW(validate_styles(builtin_styles(8)));
  std::vector<StyleSpec> all;
  for (const auto& b : builtin_styles(8)) {
    for (const auto& v : emphasis_variants(b)) all.push_back(v);
  }
  CHECK(all.size() == 32);
  CHECK_NOTHROW(validate_styles(all));
  std::set<std::string> ids;
  for (const auto& s : all) ids.insert(s.id);
  CHECK(ids.size() == 32);

  auto twin = builtin_styles(2);
  twin[1] = twin[0];
  twin[1].id = "twin";
  CHECK_THROWS_AS(validate_styles(twin), Error);
  auto dup = builtin_styles(2);
  dup[1].id = dup[0].id;
  CHECK_THROWS_AS(validate_styles(dup), Error);
  StyleSpec thin = builtin_styles(2)[0];
  thin.thickness = 0.5;
  CHECK_THROWS_AS(thin.validate(), Error);
  CHECK_THROWS_AS(builtin_styles(1), Error);
  CHECK_THROWS_AS(builtin_styles(9), Error);
}

TEST_CASE("page seeds") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(page_seed(1, "alder", 0) == mix_seed(mix_seed(1, fnv1a64("alder")), 0));
  CHECK(page_seed(1, "alder", 0) != page_seed(1, "alder", 1));
  CHECK(page_seed(1, "alder", 0) != page_seed(1, "birch", 0));
}

TEST_CASE("dataset generation") {
  const fs::path dir = fresh_dir("gen");
  DatasetOptions opt;
  opt.pages_per_style = 3;
  opt.page_width = 192;
  opt.page_height = 192;
  opt.seed = 11;
  const auto rows = gen_dataset(builtin_styles(2), opt, dir);
  CHECK(rows.size() == 6);
  for (const auto& r : rows) CHECK(fs::exists(dir / r.path));
  CHECK(rows[0].label == rows[2].label);
  CHECK(rows[3].label != rows[0].label);
  const auto manifest = read_bytes(dir / "manifest.txt");
  CHECK(parse_manifest(std::string(manifest.begin(), manifest.end())) == rows);

  const fs::path again = fresh_dir("gen2");
  opt.jobs = 3;
  gen_dataset(builtin_styles(2), opt, again);
  CHECK(read_bytes(again / "manifest.txt") == manifest);
  for (const auto& r : rows) CHECK(read_bytes(again / r.path) == read_bytes(dir / r.path));

  CHECK_THROWS_AS(gen_dataset({builtin_styles(2)[0]}, opt, fresh_dir("one")), Error);
  try {
    gen_dataset(builtin_styles(2), opt, dir / "manifest.txt" / "x");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("manifest text") {
  const std::vector<ManifestEntry> rows = {{"pages/a,b.pgm", "x"}, {"p/q.pgm", "y-z"}};
  CHECK(format_manifest(rows) == "pages/a,b.pgm,x\np/q.pgm,y-z\n");
  CHECK(parse_manifest("pages/a,b.pgm,x\r\n\np/q.pgm,y-z") == rows);
  try {
    parse_manifest("a.pgm,x\nnocomma\n");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("collage ground truth") {
  const auto styles = builtin_styles(2);
  const BlockGridConfig cfg;
  const auto layout = split_layout(384, 192, 2);
  const Collage c = make_collage(styles, 384, 192, layout, 3);
  CHECK(c.page.width() == 384);
  const CollageTruth t = collage_truth(c.regions, 384, 192, cfg);
  CHECK(t.columns * t.rows == static_cast<int>(partition_blocks(c.page, cfg).size()));
  CHECK(t.label == std::vector<int>{0, 0, 1, 1, 0, 0, 1, 1});

  // A boundary inside a block column marks that column as straddling.
  const auto uneven = split_layout(400, 192, 2);
  const CollageTruth u = collage_truth(uneven, 400, 192, cfg);
  CHECK(u.columns * u.rows == static_cast<int>(partition_blocks(GrayImage(400, 192), cfg).size()));
  CHECK(u.label == std::vector<int>{0, 0, -1, 1, 0, 0, -1, 1});
  CHECK(make_collage(styles, 384, 192, layout, 3).page == c.page);
}

TEST_CASE("collage layout errors") {
  const auto styles = builtin_styles(2);
  CHECK_THROWS_AS(make_collage(styles, 384, 192, {{0, 0, 384, 192, 0}}, 1), Error);
  CHECK_THROWS_AS(make_collage(styles, 384, 192, {{0, 0, 192, 192, 0}, {192, 0, 100, 192, 1}}, 1), Error);
  CHECK_THROWS_AS(make_collage(styles, 384, 192, {{0, 0, 200, 192, 0}, {192, 0, 192, 192, 1}}, 1), Error);
  CHECK_THROWS_AS(make_collage(styles, 384, 192, {{0, 0, 192, 192, 0}, {192, 0, 192, 192, 2}}, 1), Error);
  CHECK_THROWS_AS(make_collage(styles, 384, 192, {{0, 0, 192, 192, 0}, {192, 0, 200, 192, 1}}, 1), Error);
  try {
    make_collage(styles, 384, 192, {{0, 0, 192, 192, 0}, {192, 0, 100, 192, 1}}, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}
