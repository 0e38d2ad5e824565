#include "texwave/features.hpp"

#include <algorithm>
#include <cmath>

#include "texwave/error.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

std::string to_string(Transform t) { return t == Transform::Dtcwt ? "dtcwt" : "dwt"; }

Transform parse_transform(const std::string& name) {
  if (name == "dtcwt") return Transform::Dtcwt;
  if (name == "dwt") return Transform::Dwt;
  throw Error(ErrorKind::Config, "unknown transform '" + name + "' (expected dtcwt or dwt)");
}

std::string FeatureLayout::tag() const {
  return transform == Transform::Dtcwt ? "L-major/orient[-75,-45,-15,15,45,75]/stat[mean,var]"
                                       : "L-major/orient[H,V,D]/stat[mean,var]";
}

namespace {

// Two-pass moments keep the variance accurate for near-constant bands.
template <class It, class Mag>
void push_moments(It first, It last, Mag mag, std::vector<double>& out) {
  const double n = static_cast<double>(std::distance(first, last));
  double sum = 0.0;
  for (It it = first; it != last; ++it) sum += mag(*it);
  const double mean = sum / n;
  double sq = 0.0;
  for (It it = first; it != last; ++it) {
    const double d = mag(*it) - mean;
    sq += d * d;
  }
  out.push_back(mean);
  out.push_back(sq / n);
}

}  // namespace

FeatureVector extract_features(const Plane& block, const FeatureLayout& layout) {
  FeatureVector fv;
  fv.layout = layout;
  fv.values.reserve(static_cast<std::size_t>(layout.dimension()));
  if (layout.transform == Transform::Dtcwt) {
    const DtcwtPyramid pyr = dtcwt_forward(block, layout.levels);
    // Subbands are already stored level-major in orientation order.
    for (const ComplexSubband& sb : pyr.subbands) {
      push_moments(sb.coeffs.begin(), sb.coeffs.end(), [](std::complex<double> c) { return std::abs(c); },
                   fv.values);
    }
  } else {
    const DwtPyramid pyr = dwt_forward(block, layout.levels);
    for (const DwtLevel& lv : pyr.detail) {
      for (const Plane& band : lv.bands) {
        push_moments(band.data.begin(), band.data.end(), [](double v) { return std::abs(v); }, fv.values);
      }
    }
  }
  return fv;
}

std::vector<double> Standardizer::apply(std::span<const double> v) const {
  std::vector<double> out(v.begin(), v.end());
  apply_in_place(out);
  return out;
}

void Standardizer::apply_in_place(std::vector<double>& v) const {
  if (v.size() != mean.size()) {
    throw Error(ErrorKind::Shape, "standardizer expects " + std::to_string(mean.size()) +
                                      " features, got " + std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] - mean[i]) / stddev[i];
}

Standardizer fit_standardizer(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw Error(ErrorKind::Shape, "standardizer needs at least two vectors");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw Error(ErrorKind::Shape, "standardizer input has mixed layouts");
  }
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  const double n = static_cast<double>(vectors.size());
  // Offsets from the first vector: identical inputs give an exact mean.
  const auto& first = vectors.front();
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] += v[i] - first[i];
  }
  for (std::size_t i = 0; i < dim; ++i) s.mean[i] = first[i] + s.mean[i] / n;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = v[i] - s.mean[i];
      s.stddev[i] += d * d;
    }
  }
  for (double& sd : s.stddev) sd = std::max(std::sqrt(sd / n), Standardizer::kMinStd);
  return s;
}

Standardizer fit_standardizer(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw Error(ErrorKind::Shape, "standardizer needs at least two vectors");
  std::vector<std::vector<double>> raw;
  raw.reserve(vectors.size());
  for (const auto& fv : vectors) {
    if (!(fv.layout == vectors.front().layout)) throw Error(ErrorKind::Shape, "standardizer input has mixed layouts");
    raw.push_back(fv.values);
  }
  return fit_standardizer(std::span<const std::vector<double>>(raw));
}

FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v) {
  return {v.layout, s.apply(v.values)};
}

}  // namespace texwave
