#include "texwave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <system_error>

#include "texwave/error.hpp"
#include "texwave/parallel.hpp"
#include "texwave/rng.hpp"

namespace texwave {

namespace {

constexpr double kInk = 0.08;       // stroke intensity
constexpr double kGlyphHeight = 12.0;
constexpr double kLinePitch = 22.0;
constexpr int kPageMargin = 16;
constexpr double kMeanStrokesPerGlyph = 3.0;
constexpr int kMinPageSide = 192;

bool valid_token(const std::string& s) {
  return !s.empty() && s.find_first_of(" \t\r\n,") == std::string::npos;
}

struct Rect {
  int x0, y0, x1, y1;  // half-open
};

// Anti-aliased capsule: coverage falls linearly over one pixel at the edge.
void draw_segment(Plane& canvas, const Rect& clip, double ax, double ay, double bx, double by, double width) {
  const double r = 0.5 * width;
  const int x_lo = std::max(clip.x0, static_cast<int>(std::floor(std::min(ax, bx) - r - 1)));
  const int x_hi = std::min(clip.x1, static_cast<int>(std::ceil(std::max(ax, bx) + r + 1)));
  const int y_lo = std::max(clip.y0, static_cast<int>(std::floor(std::min(ay, by) - r - 1)));
  const int y_hi = std::min(clip.y1, static_cast<int>(std::ceil(std::max(ay, by) + r + 1)));
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  for (int y = y_lo; y < y_hi; ++y) {
    for (int x = x_lo; x < x_hi; ++x) {
      const double px = x + 0.5 - ax;
      const double py = y + 0.5 - ay;
      const double t = len2 > 0 ? std::clamp((px * dx + py * dy) / len2, 0.0, 1.0) : 0.0;
      const double d = std::hypot(px - t * dx, py - t * dy);
      const double cover = std::clamp(r + 0.5 - d, 0.0, 1.0);
      if (cover > 0) {
        double& v = canvas.at(x, y);
        v = std::min(v, 1.0 - (1.0 - kInk) * cover);
      }
    }
  }
}

void render_text(Plane& canvas, const Rect& area, int margin, const StyleSpec& style, Rng& rng) {
  const double advance = 96.0 * 96.0 * kMeanStrokesPerGlyph / (style.density * kLinePitch);
  const double width = style.stroke_width();
  const double left = area.x0 + margin;
  const double right = area.x1 - margin;
  for (double base = area.y0 + margin + kGlyphHeight + rng.uniform(0.0, 4.0); base <= area.y1 - margin;
       base += kLinePitch) {
    const double baseline = base + rng.uniform(-1.0, 1.0);
    double x = left + rng.uniform(0.0, advance);
    while (x + advance <= right) {
      const int strokes = 2 + static_cast<int>(rng.below(3));
      for (int s = 0; s < strokes; ++s) {
        const double theta = (style.angle_mean + style.angle_spread * rng.normal()) * std::numbers::pi / 180.0;
        const double len = kGlyphHeight * rng.uniform(0.4, 1.0);
        const double cx = x + rng.uniform(0.1, 0.9) * advance;
        const double cy = baseline - 0.5 * kGlyphHeight + rng.uniform(-0.25, 0.25) * kGlyphHeight;
        // y grows downwards, so the upward direction of the stroke is -sin.
        const double hx = 0.5 * len * std::cos(theta);
        const double hy = -0.5 * len * std::sin(theta);
        double ax = cx - hx, ay = cy - hy, bx = cx + hx, by = cy + hy;
        ax += style.slant * (baseline - ay);
        bx += style.slant * (baseline - by);
        draw_segment(canvas, area, ax, ay, bx, by, width);
      }
      x += advance;
      if (rng.uniform() < 0.15) x += advance;  // word gap
    }
  }
}

Plane gaussian_blur(const Plane& in, double sigma) {
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * half + 1);
  double sum = 0;
  for (int i = -half; i <= half; ++i) sum += k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = in.width;
  const int h = in.height;
  Plane tmp(w, h);
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -half; i <= half; ++i) acc += k[i + half] * in.at(std::clamp(x + i, 0, w - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -half; i <= half; ++i) acc += k[i + half] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void StyleSpec::validate() const {
  if (!valid_token(id)) throw Error(ErrorKind::Config, "style id '" + id + "' must be non-empty without spaces or commas");
  const double vals[] = {angle_mean, angle_spread, thickness, density, slant, weight};
  for (double v : vals) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Config, "style '" + id + "' has a non-finite parameter");
  }
  if (thickness < 1.0) throw Error(ErrorKind::Config, "style '" + id + "': thickness must be >= 1 px");
  if (density <= 0.0) throw Error(ErrorKind::Config, "style '" + id + "': density must be > 0");
  if (weight <= 0.0) throw Error(ErrorKind::Config, "style '" + id + "': weight must be > 0");
  if (angle_spread < 0.0) throw Error(ErrorKind::Config, "style '" + id + "': angle spread must be >= 0");
}

void validate_styles(const std::vector<StyleSpec>& styles) {
  std::set<std::string> ids;
  for (const auto& s : styles) {
    s.validate();
    if (!ids.insert(s.id).second) throw Error(ErrorKind::Config, "duplicate style id '" + s.id + "'");
  }
  for (std::size_t i = 0; i < styles.size(); ++i) {
    for (std::size_t j = i + 1; j < styles.size(); ++j) {
      const auto& a = styles[i];
      const auto& b = styles[j];
      if (a.angle_mean == b.angle_mean && a.angle_spread == b.angle_spread && a.thickness == b.thickness &&
          a.density == b.density && a.slant == b.slant && a.weight == b.weight) {
        throw Error(ErrorKind::Config, "styles '" + a.id + "' and '" + b.id + "' have identical parameters");
      }
    }
  }
}

std::vector<StyleSpec> builtin_styles(int count) {
  static const std::vector<StyleSpec> kBase = {
      {"alder", 90, 12, 1.5, 110, 0.0, 1.0},   {"birch", 120, 15, 1.5, 110, 0.0, 1.0},
      {"cedar", 60, 15, 1.5, 110, 0.0, 1.0},   {"dogwood", 0, 12, 1.5, 110, 0.0, 1.0},
      {"elm", 90, 45, 2.5, 80, 0.0, 1.0},      {"fir", 90, 25, 1.2, 170, 0.0, 1.0},
      {"ginkgo", 30, 25, 2.0, 130, 0.0, 1.0},  {"hazel", 150, 25, 1.2, 150, 0.0, 1.0},
  };
  if (count < 2 || count > static_cast<int>(kBase.size())) {
    throw Error(ErrorKind::Config, "style count must be in [2, " + std::to_string(kBase.size()) + "]");
  }
  return {kBase.begin(), kBase.begin() + count};
}

std::vector<StyleSpec> emphasis_variants(const StyleSpec& base) {
  std::vector<StyleSpec> out;
  for (int e = 0; e < 4; ++e) {
    StyleSpec s = base;
    s.id = base.id + "-" + kEmphasisNames[e];
    if (e & 1) s.slant += 0.2;
    if (e & 2) s.weight *= 1.8;
    out.push_back(s);
  }
  return out;
}

const char* to_string(NoiseRegime r) noexcept {
  switch (r) {
    case NoiseRegime::None: return "none";
    case NoiseRegime::Low: return "low";
    case NoiseRegime::High: return "high";
  }
  return "none";
}

NoiseRegime parse_noise_regime(const std::string& name) {
  if (name == "none") return NoiseRegime::None;
  if (name == "low") return NoiseRegime::Low;
  if (name == "high") return NoiseRegime::High;
  throw Error(ErrorKind::Config, "unknown noise regime '" + name + "' (expected none, low or high)");
}

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::Config, "noise sigma must be >= 0");
  if (iterations < 0) throw Error(ErrorKind::Config, "noise iterations must be >= 0");
  if (!(blur_sigma > 0.0)) throw Error(ErrorKind::Config, "blur sigma must be > 0");
  if (!(grain >= 0.0) || !(jitter >= 0.0) || !(contrast > 0.0)) throw Error(ErrorKind::Config, "bad high-noise parameter");
  if (levels < 2) throw Error(ErrorKind::Config, "quantization levels must be >= 2");
}

GrayImage render_page(const StyleSpec& style, int width, int height, std::uint64_t seed) {
  style.validate();
  if (width < kMinPageSide || height < kMinPageSide) {
    throw Error(ErrorKind::Size, "page must be at least 192x192, got " + std::to_string(width) + "x" +
                                     std::to_string(height));
  }
  Plane canvas(width, height, 1.0);
  Rng rng(seed);
  render_text(canvas, {0, 0, width, height}, kPageMargin, style, rng);
  return GrayImage::clamped(canvas);
}

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec) {
  spec.validate();
  if (spec.regime == NoiseRegime::None) return img;
  Rng rng(spec.seed);
  Plane p = img.plane();
  if (spec.regime == NoiseRegime::Low) {
    for (double& v : p.data) v += spec.sigma * rng.normal();
    return GrayImage::clamped(p);
  }
  const double q = spec.levels - 1;
  for (int it = 0; it < spec.iterations; ++it) {
    p = gaussian_blur(p, spec.blur_sigma);
    const double t = 0.5 + rng.uniform(-spec.jitter, spec.jitter);
    for (double& v : p.data) {
      v = std::round(std::clamp(v + spec.grain * rng.normal(), 0.0, 1.0) * q) / q;
      v = std::clamp(0.5 + spec.contrast * (v - t), 0.0, 1.0);
    }
  }
  return GrayImage::clamped(p);
}

double snr_db(const GrayImage& clean, const GrayImage& noisy) {
  if (clean.width() != noisy.width() || clean.height() != noisy.height()) {
    throw Error(ErrorKind::Shape, "snr: image sizes differ");
  }
  double signal = 0;
  double noise = 0;
  const auto a = clean.pixels();
  const auto b = noisy.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    signal += a[i] * a[i];
    noise += (b[i] - a[i]) * (b[i] - a[i]);
  }
  if (noise == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

std::uint64_t fnv1a64(const std::string& s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t page_seed(std::uint64_t base, const std::string& style_id, int page_index) {
  return mix_seed(mix_seed(base, fnv1a64(style_id)), static_cast<std::uint64_t>(page_index));
}

std::vector<ManifestEntry> gen_dataset(const std::vector<StyleSpec>& styles, const DatasetOptions& opt,
                                       const std::filesystem::path& out_dir) {
  if (styles.size() < 2) throw Error(ErrorKind::Config, "need at least 2 styles");
  validate_styles(styles);
  opt.noise.validate();
  if (opt.pages_per_style < 1) throw Error(ErrorKind::Config, "pages per style must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "pages", ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + (out_dir / "pages").string() + "': " + ec.message());

  std::vector<ManifestEntry> rows;
  for (const auto& s : styles) {
    for (int k = 0; k < opt.pages_per_style; ++k) rows.push_back({"pages/" + s.id + "-" + std::to_string(k) + ".pgm", s.id});
  }
  const auto per = static_cast<std::size_t>(opt.pages_per_style);
  parallel_for(rows.size(), opt.jobs, [&](std::size_t i) {
    const StyleSpec& style = styles[i / per];
    const int k = static_cast<int>(i % per);
    const std::uint64_t seed = page_seed(opt.seed, style.id, k);
    NoiseSpec noise = opt.noise;
    noise.seed = mix_seed(seed, noise.seed);
    const GrayImage page = apply_noise(render_page(style, opt.page_width, opt.page_height, seed), noise);
    write_pgm_file(out_dir / rows[i].path, page);
  });
  const std::string text = format_manifest(rows);
  write_bytes(out_dir / "manifest.txt",
              std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return rows;
}

std::string format_manifest(const std::vector<ManifestEntry>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.path + "," + r.label + "\n";
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> rows;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw Error(ErrorKind::Parse, "manifest line " + std::to_string(n) + ": expected 'path,label'");
    }
    ManifestEntry e{line.substr(0, comma), line.substr(comma + 1)};
    if (!valid_token(e.label)) {
      throw Error(ErrorKind::Parse, "manifest line " + std::to_string(n) + ": bad label '" + e.label + "'");
    }
    rows.push_back(std::move(e));
  }
  return rows;
}

std::vector<CollageRegion> split_layout(int width, int height, int columns) {
  std::vector<CollageRegion> out;
  for (int i = 0; i < columns; ++i) {
    const int x0 = static_cast<int>(static_cast<long>(width) * i / columns);
    const int x1 = static_cast<int>(static_cast<long>(width) * (i + 1) / columns);
    out.push_back({x0, 0, x1 - x0, height, i});
  }
  return out;
}

Collage make_collage(const std::vector<StyleSpec>& styles, int width, int height,
                     const std::vector<CollageRegion>& regions, std::uint64_t seed) {
  if (regions.size() < 2) throw Error(ErrorKind::Config, "collage needs at least 2 regions");
  long area = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 || r.x + r.width > width || r.y + r.height > height) {
      throw Error(ErrorKind::Config, "collage region " + std::to_string(i) + " lies outside the page");
    }
    if (r.style < 0 || r.style >= static_cast<int>(styles.size())) {
      throw Error(ErrorKind::Config, "collage region " + std::to_string(i) + " has no style");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = regions[j];
      if (r.x < o.x + o.width && o.x < r.x + r.width && r.y < o.y + o.height && o.y < r.y + r.height) {
        throw Error(ErrorKind::Config, "collage regions " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
    area += static_cast<long>(r.width) * r.height;
  }
  if (area != static_cast<long>(width) * height) throw Error(ErrorKind::Config, "collage regions do not tile the page");
  for (const auto& s : styles) s.validate();

  Plane canvas(width, height, 1.0);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    Rng rng(mix_seed(seed, i));
    render_text(canvas, {r.x, r.y, r.x + r.width, r.y + r.height}, 0, styles[r.style], rng);
  }
  return {GrayImage::clamped(canvas), regions};
}

CollageTruth collage_truth(const std::vector<CollageRegion>& regions, int width, int height,
                           const BlockGridConfig& cfg) {
  cfg.validate();
  CollageTruth t;
  t.columns = block_count(width, cfg.block_width, cfg.effective_stride_x());
  t.rows = block_count(height, cfg.block_height, cfg.effective_stride_y());
  for (int by = 0; by < t.rows; ++by) {
    for (int bx = 0; bx < t.columns; ++bx) {
      const int x0 = bx * cfg.effective_stride_x();
      const int y0 = by * cfg.effective_stride_y();
      int label = -1;
      for (const auto& r : regions) {
        if (x0 >= r.x && y0 >= r.y && x0 + cfg.block_width <= r.x + r.width && y0 + cfg.block_height <= r.y + r.height) {
          label = r.style;
        }
      }
      t.label.push_back(label);
    }
  }
  return t;
}

}  // namespace texwave
