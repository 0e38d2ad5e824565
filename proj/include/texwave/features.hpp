#pragma once

#include <span>
#include <string>
#include <vector>

#include "texwave/image.hpp"

namespace texwave {

enum class Transform { Dtcwt, Dwt };

std::string to_string(Transform t);
Transform parse_transform(const std::string& name);

/// Frozen ordering of a feature vector: level-major, then orientation, then
/// (mean, variance) of the subband coefficient magnitudes.
struct FeatureLayout {
  Transform transform = Transform::Dtcwt;
  int levels = 3;

  int orientations() const noexcept { return transform == Transform::Dtcwt ? 6 : 3; }
  int dimension() const noexcept { return 2 * orientations() * levels; }
  /// e.g. "L-major/orient[-75,-45,-15,15,45,75]/stat[mean,var]".
  std::string tag() const;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FeatureVector {
  FeatureLayout layout;
  std::vector<double> values;
};

/// Mean and population variance of |coefficient| for every subband.
FeatureVector extract_features(const Plane& block, const FeatureLayout& layout = {});
inline FeatureVector extract_features(const GrayImage& block, const FeatureLayout& layout = {}) {
  return extract_features(block.plane(), layout);
}

struct Standardizer {
  static constexpr double kMinStd = 1e-12;

  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dimension() const noexcept { return mean.size(); }
  /// (v - mean) / std. Throws Error(Shape) on a length mismatch.
  std::vector<double> apply(std::span<const double> v) const;
  void apply_in_place(std::vector<double>& v) const;
};

/// Per-dimension mean and population standard deviation (clamped at kMinStd).
Standardizer fit_standardizer(std::span<const std::vector<double>> vectors);
Standardizer fit_standardizer(std::span<const FeatureVector> vectors);
FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v);

}  // namespace texwave
