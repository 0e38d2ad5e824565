#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code under test except for plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "texwave/image.hpp"
#include "texwave/rng.hpp"
#include "texwave/wavelet.hpp"

namespace oracle {

using texwave::Plane;

inline Plane random_plane(int w, int h, std::uint64_t seed) {
  texwave::Rng rng(seed);
  Plane p(w, h);
  for (double& v : p.data) v = rng.uniform();
  return p;
}

inline double max_abs_diff(const Plane& a, const Plane& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) e = std::max(e, std::abs(a.data[i] - b.data[i]));
  return e;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Sinusoidal grating whose stripes run along `deg` (counter-clockwise, y up).
inline Plane grating(int n, double deg, double period) {
  const double th = deg2rad(deg);
  Plane p(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = -std::sin(th) * x + std::cos(th) * (-y);
      p.at(x, y) = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * u / period);
    }
  }
  return p;
}

/// Grating under a Gaussian envelope centred in the image.
inline Plane gabor(int n, double deg, double period, double sigma) {
  const double th = deg2rad(deg);
  const double c = n / 2.0;
  Plane p(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double X = x - c;
      const double Y = -(y - c);
      const double u = -std::sin(th) * X + std::cos(th) * Y;
      const double env = std::exp(-(X * X + Y * Y) / (2 * sigma * sigma));
      p.at(x, y) = 0.5 + 0.5 * env * std::cos(2 * std::numbers::pi * u / period);
    }
  }
  return p;
}

inline Plane circular_shift(const Plane& p, int sx, int sy) {
  Plane q(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      q.at(((x + sx) % p.width + p.width) % p.width, ((y + sy) % p.height + p.height) % p.height) = p.at(x, y);
    }
  }
  return q;
}

inline double energy(const std::vector<std::complex<double>>& c) {
  double e = 0;
  for (auto v : c) e += std::norm(v);
  return e;
}

inline double energy(const std::vector<double>& c) {
  double e = 0;
  for (double v : c) e += v * v;
  return e;
}

/// DWT band whose nominal sensitivity is closest to a DT-CWT orientation:
/// +-15 -> horizontal stripes, +-75 -> vertical stripes, +-45 -> diagonal.
inline texwave::DwtBand dwt_band_for(int deg) {
  const int a = std::abs(deg);
  return a == 15 ? texwave::DwtBand::Horizontal : a == 75 ? texwave::DwtBand::Vertical : texwave::DwtBand::Diagonal;
}

/// Full circular convolution c[m] = sum_t f[t] x[(m - t) mod N], then keep
/// samples m = 2k + origin.
inline std::vector<double> conv_downsample(std::span<const double> x, std::span<const double> f, int origin) {
  const int n = static_cast<int>(x.size());
  std::vector<double> full(n, 0.0);
  for (int m = 0; m < n; ++m) {
    for (int t = 0; t < static_cast<int>(f.size()); ++t) full[m] += f[t] * x[((m - t) % n + n) % n];
  }
  std::vector<double> out;
  for (int k = 0; k < n / 2; ++k) out.push_back(full[(2 * k + origin) % n]);
  return out;
}

/// Dominant stripe direction (degrees in (-90, 90], y up) of a set of images,
/// from the summed gradient structure tensor.
inline double ridge_degrees(const std::vector<Plane>& images) {
  double jxx = 0, jyy = 0, jxy = 0;
  for (const Plane& p : images) {
    for (int y = 1; y + 1 < p.height; ++y) {
      for (int x = 1; x + 1 < p.width; ++x) {
        const double gx = 0.5 * (p.at(x + 1, y) - p.at(x - 1, y));
        const double gy = -0.5 * (p.at(x, y + 1) - p.at(x, y - 1));
        jxx += gx * gx;
        jyy += gy * gy;
        jxy += gx * gy;
      }
    }
  }
  double r = 0.5 * std::atan2(2 * jxy, jxx - jyy) * 180.0 / std::numbers::pi + 90.0;
  if (r > 90.0) r -= 180.0;
  return r;
}

inline double angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

/// Otsu by exhaustive scan over pixels: for each boundary k in [1, 255], the
/// between-class variance of the bin indices floor(256 v). Smallest maximizer.
inline int otsu_bin_scan(std::span<const double> pixels) {
  std::vector<int> bins;
  for (double v : pixels) bins.push_back(std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255));
  int best_k = -1;
  double best = -1;
  for (int k = 1; k <= 255; ++k) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int b : bins) {
      if (b < k) {
        n0 += 1;
        s0 += b;
      } else {
        n1 += 1;
        s1 += b;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double n = n0 + n1;
    const double d = s0 / n0 - s1 / n1;
    const double between = (n0 / n) * (n1 / n) * d * d;
    if (between > best * (1 + 1e-12)) {
      best = between;
      best_k = k;
    }
  }
  return best_k;
}

inline double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

/// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij.
inline double dual_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<double>& a, double gamma) {
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * rbf(x[i], x[j], gamma);
  }
  return lin - 0.5 * quad;
}

/// KKT certificate of a C-SVC dual point with decision values
/// f(x_i) = b + sum_j a_j y_j K(x_j, x_i), checked at tolerance `tol`.
inline bool kkt_holds(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const std::vector<double>& a, double bias, double c, double gamma, double tol) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = bias;
    for (std::size_t j = 0; j < x.size(); ++j) f += a[j] * y[j] * rbf(x[j], x[i], gamma);
    const double m = y[i] * f;
    if (a[i] < 0 || a[i] > c) return false;
    if (a[i] == 0 && m < 1 - tol) return false;
    if (a[i] > 0 && a[i] < c && std::abs(m - 1) > tol) return false;
    if (a[i] == c && m > 1 + tol) return false;
  }
  return true;
}

/// Maximum of the C-SVC dual by exhaustive grid search. The last multiplier is
/// fixed by sum(a_i y_i) = 0; the others range over a grid on [0, C] that is
/// repeatedly refined around the best point found (the problem is concave).
inline double grid_dual_optimum(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double c,
                                double gamma, int points = 60, int refinements = 8) {
  const std::size_t n = x.size();
  const std::size_t free_vars = n - 1;
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = y[i] * y[j] * rbf(x[i], x[j], gamma);
  }
  auto objective = [&](const std::vector<double>& a) {
    double lin = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += a[i];
      for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * k[i][j];
    }
    return lin - 0.5 * quad;
  };
  std::vector<double> lo(free_vars, 0.0), hi(free_vars, c);
  std::vector<double> best_a(free_vars, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int round = 0; round <= refinements; ++round) {
    std::vector<double> step(free_vars);
    for (std::size_t v = 0; v < free_vars; ++v) step[v] = (hi[v] - lo[v]) / points;
    std::vector<int> idx(free_vars, 0);
    std::vector<double> a(n);
    while (true) {
      double s = 0;
      for (std::size_t v = 0; v < free_vars; ++v) {
        a[v] = lo[v] + idx[v] * step[v];
        s += a[v] * y[v];
      }
      a[n - 1] = -s * y[n - 1];
      if (a[n - 1] >= 0 && a[n - 1] <= c) {
        const double w = objective(a);
        if (w > best) {
          best = w;
          best_a.assign(a.begin(), a.begin() + static_cast<long>(free_vars));
        }
      }
      std::size_t v = 0;
      while (v < free_vars && ++idx[v] > points) idx[v++] = 0;
      if (v == free_vars) break;
    }
    for (std::size_t v = 0; v < free_vars; ++v) {
      lo[v] = std::max(0.0, best_a[v] - 2 * step[v]);
      hi[v] = std::min(c, best_a[v] + 2 * step[v]);
    }
  }
  return best;
}

}  // namespace oracle
