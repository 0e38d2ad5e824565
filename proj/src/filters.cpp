#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "texwave/error.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

std::string to_string(TreeBRule rule) {
  switch (rule) {
    case TreeBRule::ReverseNegate: return "reverse-negate";
    case TreeBRule::ReverseLowpassOnly: return "reverse-lowpass/reverse-negate-highpass";
  }
  return "unknown";
}

Coeffs reversed(std::span<const double> h) { return Coeffs(h.rbegin(), h.rend()); }

Coeffs alternating_flip(std::span<const double> h) {
  const std::size_t n = h.size();
  Coeffs g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (i % 2 == 0 ? 1.0 : -1.0) * h[n - 1 - i];
  return g;
}

Coeffs refine_orthonormal(std::span<const double> published) {
  const int n = static_cast<int>(published.size());
  std::vector<int> support;
  for (int i = 0; i < n; ++i) {
    if (published[i] != 0.0) support.push_back(i);
  }
  const int s = static_cast<int>(support.size());
  const int shifts = n / 2;  // double-shift orthogonality for k = 1 .. n/2 - 1
  const int m = shifts + 1;  // unit norm, shift constraints, zero response at Nyquist

  Coeffs h(published.begin(), published.end());
  auto residual = [&](Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    r.setZero(m);
    jac.setZero(m, s);
    for (int k = 0; k < shifts; ++k) {
      double acc = k == 0 ? -1.0 : 0.0;
      for (int i = 0; i + 2 * k < n; ++i) acc += h[i] * h[i + 2 * k];
      r(k) = acc;
      for (int c = 0; c < s; ++c) {
        const int p = support[c];
        double d = 0.0;
        if (k == 0) {
          d = 2.0 * h[p];
        } else {
          if (p + 2 * k < n) d += h[p + 2 * k];
          if (p - 2 * k >= 0) d += h[p - 2 * k];
        }
        jac(k, c) = d;
      }
    }
    double alt = 0.0;
    for (int i = 0; i < n; ++i) alt += (i % 2 == 0 ? 1.0 : -1.0) * h[i];
    r(shifts) = alt;
    for (int c = 0; c < s; ++c) jac(shifts, c) = support[c] % 2 == 0 ? 1.0 : -1.0;
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  for (int iter = 0; iter < 50; ++iter) {
    residual(r, jac);
    if (r.cwiseAbs().maxCoeff() < 1e-16) break;
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r);
    for (int c = 0; c < s; ++c) h[support[c]] += step(c);
  }
  residual(r, jac);
  if (r.cwiseAbs().maxCoeff() > 1e-13) {
    throw Error(ErrorKind::Degenerate, "filter refinement did not reach orthonormality");
  }
  // Orthonormality fixes the DC gain up to sign; keep it positive.
  double dc = 0.0;
  for (double v : h) dc += v;
  if (dc < 0) {
    for (double& v : h) v = -v;
  }
  return h;
}

namespace {

Coeffs advance_one(const Coeffs& h) {
  Coeffs out(h.size(), 0.0);
  for (std::size_t i = 0; i + 1 < h.size(); ++i) out[i] = h[i + 1];
  return out;
}

double dc_gain(std::span<const double> h) {
  double s = 0.0;
  for (double v : h) s += v;
  return s;
}

FilterPair orthonormal_pair(Coeffs low) {
  FilterPair p;
  p.high = alternating_flip(low);
  p.low = std::move(low);
  return p;
}

}  // namespace

FilterBank make_filter_bank() {
  FilterBank bank;
  // Published rows. The Kingsbury lowpass row lists nine taps; the tenth is zero.
  bank.kingsbury_low = {0, -0.0884, 0.0884, 0.6959, 0.6959, 0.0884, -0.0884, 0.0112, 0.0112, 0};
  bank.kingsbury_high = {0.0112, 0.0112, -0.0884, 0.0884, 0.6959, 0.6959, 0.0884, -0.0884, 0, 0};
  bank.farras_low = {0.0351, 0, -0.0883, 0.2339, 0.7603, 0.5875, 0, -0.1143, 0, 0};
  bank.farras_high = {0, 0, -0.1143, 0, 0.5875, 0.7603, 0.2339, -0.0883, 0, 0.0351};

  const Coeffs first_a = refine_orthonormal(bank.kingsbury_low);
  const Coeffs deep_a = refine_orthonormal(bank.farras_low);

  // Negating a lowpass reversal flips its DC gain to -sqrt(2), which breaks
  // the lowpass normalization and swaps the sign of the tree-B path. The
  // reversal-only rule is used for lowpass filters whenever that happens.
  const Coeffs literal_b = [&] {
    Coeffs r = reversed(deep_a);
    for (double& v : r) v = -v;
    return r;
  }();
  bank.tree_b_rule = std::abs(dc_gain(literal_b) - std::numbers::sqrt2) < 1e-3
                         ? TreeBRule::ReverseNegate
                         : TreeBRule::ReverseLowpassOnly;

  auto tree_b_low = [&](const Coeffs& a) {
    Coeffs r = reversed(a);
    if (bank.tree_b_rule == TreeBRule::ReverseNegate) {
      for (double& v : r) v = -v;
    }
    return r;
  };

  bank.first_stage[0] = orthonormal_pair(first_a);
  // First stage: tree B runs one sample ahead of tree A.
  bank.first_stage[1] = orthonormal_pair(advance_one(tree_b_low(first_a)));
  bank.deep_stage[0] = orthonormal_pair(deep_a);
  bank.deep_stage[1] = orthonormal_pair(tree_b_low(deep_a));
  return bank;
}

const FilterBank& filter_bank() {
  static const FilterBank bank = make_filter_bank();
  return bank;
}

Analysis1d analysis_1d(std::span<const double> signal, std::span<const double> low,
                       std::span<const double> high) {
  const std::size_t n = signal.size();
  if (n % 2 != 0) throw Error(ErrorKind::Size, "analysis_1d: signal length must be even");
  if (n < low.size() || n < high.size()) {
    throw Error(ErrorKind::Size, "analysis_1d: signal of length " + std::to_string(n) +
                                     " is shorter than the filter (" + std::to_string(low.size()) + ")");
  }
  Analysis1d out{Coeffs(n / 2, 0.0), Coeffs(n / 2, 0.0)};
  const std::size_t origin = static_cast<std::size_t>(filter_origin(low.size()));
  for (std::size_t k = 0; k < n / 2; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t t = 0; t < low.size(); ++t) {
      const std::size_t idx = (2 * k + origin + n - t) % n;
      a += low[t] * signal[idx];
      d += high[t] * signal[idx];
    }
    out.approx[k] = a;
    out.detail[k] = d;
  }
  return out;
}

Coeffs synthesis_1d(std::span<const double> approx, std::span<const double> detail,
                    std::span<const double> low, std::span<const double> high) {
  if (approx.size() != detail.size()) throw Error(ErrorKind::Shape, "synthesis_1d: channel length mismatch");
  const std::size_t n = approx.size() * 2;
  Coeffs out(n, 0.0);
  const std::size_t origin = static_cast<std::size_t>(filter_origin(low.size()));
  for (std::size_t k = 0; k < approx.size(); ++k) {
    for (std::size_t t = 0; t < low.size(); ++t) {
      const std::size_t idx = (2 * k + origin + n * low.size() - t) % n;
      out[idx] += low[t] * approx[k] + high[t] * detail[k];
    }
  }
  return out;
}

}  // namespace texwave
