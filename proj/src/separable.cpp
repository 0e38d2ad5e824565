#include "separable.hpp"

#include <string>

#include "texwave/error.hpp"

namespace texwave::detail {

Plane pad_to_even(const Plane& p) {
  const int w = p.width + (p.width % 2);
  const int h = p.height + (p.height % 2);
  if (w == p.width && h == p.height) return p;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = y < p.height ? y : p.height - 1;
    for (int x = 0; x < w; ++x) {
      const int sx = x < p.width ? x : p.width - 1;
      out.at(x, y) = p.at(sx, sy);
    }
  }
  return out;
}

Plane crop_plane(const Plane& p, int w, int h) {
  if (w == p.width && h == p.height) return p;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = p.at(x, y);
  }
  return out;
}

namespace {

// Coefficient k is centred on input sample 2k: y[k] = sum_t f[t] x[2k + origin - t].
int start_index(int k, int taps, int n) { return (2 * k + filter_origin(taps)) % n; }

// Filters every row of `in`; outputs have half the width.
void rows_forward(const Plane& in, const FilterPair& f, Plane& lo, Plane& hi) {
  const int n = in.width;
  const int half = n / 2;
  const int taps = static_cast<int>(f.low.size());
  lo = Plane(half, in.height);
  hi = Plane(half, in.height);
  for (int y = 0; y < in.height; ++y) {
    const double* src = &in.data[static_cast<std::size_t>(y) * n];
    double* a = &lo.data[static_cast<std::size_t>(y) * half];
    double* d = &hi.data[static_cast<std::size_t>(y) * half];
    for (int k = 0; k < half; ++k) {
      double sa = 0.0;
      double sd = 0.0;
      int idx = start_index(k, taps, n);
      for (int t = 0; t < taps; ++t) {
        const double v = src[idx];
        sa += f.low[t] * v;
        sd += f.high[t] * v;
        idx = idx == 0 ? n - 1 : idx - 1;
      }
      a[k] = sa;
      d[k] = sd;
    }
  }
}

// Filters every column; outputs have half the height. Works row-wise on the
// output so memory is walked contiguously.
void cols_forward(const Plane& in, const FilterPair& f, Plane& lo, Plane& hi) {
  const int n = in.height;
  const int w = in.width;
  const int half = n / 2;
  const int taps = static_cast<int>(f.low.size());
  lo = Plane(w, half);
  hi = Plane(w, half);
  for (int k = 0; k < half; ++k) {
    double* a = &lo.data[static_cast<std::size_t>(k) * w];
    double* d = &hi.data[static_cast<std::size_t>(k) * w];
    int idx = start_index(k, taps, n);
    for (int t = 0; t < taps; ++t) {
      const double* src = &in.data[static_cast<std::size_t>(idx) * w];
      const double cl = f.low[t];
      const double ch = f.high[t];
      for (int x = 0; x < w; ++x) {
        a[x] += cl * src[x];
        d[x] += ch * src[x];
      }
      idx = idx == 0 ? n - 1 : idx - 1;
    }
  }
}

void rows_inverse(const Plane& lo, const Plane& hi, const FilterPair& f, Plane& out) {
  const int half = lo.width;
  const int n = 2 * half;
  const int taps = static_cast<int>(f.low.size());
  out = Plane(n, lo.height);
  for (int y = 0; y < lo.height; ++y) {
    const double* a = &lo.data[static_cast<std::size_t>(y) * half];
    const double* d = &hi.data[static_cast<std::size_t>(y) * half];
    double* dst = &out.data[static_cast<std::size_t>(y) * n];
    for (int k = 0; k < half; ++k) {
      int idx = start_index(k, taps, n);
      for (int t = 0; t < taps; ++t) {
        dst[idx] += f.low[t] * a[k] + f.high[t] * d[k];
        idx = idx == 0 ? n - 1 : idx - 1;
      }
    }
  }
}

void cols_inverse(const Plane& lo, const Plane& hi, const FilterPair& f, Plane& out) {
  const int half = lo.height;
  const int n = 2 * half;
  const int w = lo.width;
  const int taps = static_cast<int>(f.low.size());
  out = Plane(w, n);
  for (int k = 0; k < half; ++k) {
    const double* a = &lo.data[static_cast<std::size_t>(k) * w];
    const double* d = &hi.data[static_cast<std::size_t>(k) * w];
    int idx = start_index(k, taps, n);
    for (int t = 0; t < taps; ++t) {
      double* dst = &out.data[static_cast<std::size_t>(idx) * w];
      const double cl = f.low[t];
      const double ch = f.high[t];
      for (int x = 0; x < w; ++x) dst[x] += cl * a[x] + ch * d[x];
      idx = idx == 0 ? n - 1 : idx - 1;
    }
  }
}

}  // namespace

std::array<Plane, 4> analyze_2d(const Plane& even, const FilterPair& row, const FilterPair& col) {
  Plane lx;
  Plane hx;
  rows_forward(even, row, lx, hx);
  std::array<Plane, 4> out;
  cols_forward(lx, col, out[0], out[1]);
  cols_forward(hx, col, out[2], out[3]);
  return out;
}

Plane synthesize_2d(const std::array<Plane, 4>& bands, const FilterPair& row, const FilterPair& col) {
  Plane lx;
  Plane hx;
  cols_inverse(bands[0], bands[1], col, lx);
  cols_inverse(bands[2], bands[3], col, hx);
  Plane out;
  rows_inverse(lx, hx, row, out);
  return out;
}

void check_transform_size(const Plane& img, int levels) {
  if (levels < 1) throw Error(ErrorKind::Config, "levels must be >= 1");
  const int min_side = min_transform_side(levels);
  if (img.width < min_side || img.height < min_side) {
    throw Error(ErrorKind::Size, "image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                     " too small for " + std::to_string(levels) +
                                     " levels; minimum dimension is " + std::to_string(min_side));
  }
}

}  // namespace texwave::detail
