#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "texwave/features.hpp"

namespace texwave {

struct KernelParams {
  double c = 1.0;
  double gamma = 1.0;

  static constexpr double kMinC = 1.0, kMaxC = 1e6;
  static constexpr double kMinGamma = 1e-6, kMaxGamma = 1.0;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// exp(-gamma * |x - y|^2). Throws Error(Shape) on a length mismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

struct SmoOptions {
  double tol = 1e-3;
  int max_passes = 100;          // iteration budget is max_passes * n
  std::size_t cache_rows = 512;  // kernel rows kept in the LRU cache
};

struct BinarySvm {
  KernelParams params;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i
  double bias = 0.0;

  double decision(std::span<const double> x) const;
};

/// Everything SMO knows when it stops; `machine` keeps only alpha > 0.
struct SmoResult {
  BinarySvm machine;
  std::vector<double> alpha;  // one per training point
  double dual_objective = 0.0;  // sum(alpha) - 1/2 alpha' Q alpha (maximization form)
  double max_violation = 0.0;   // m(alpha) - M(alpha) at exit
  long iterations = 0;
  bool converged = false;
};

/// Sequential minimal optimization for the C-SVC dual with working pairs
/// chosen by maximal KKT violation. Labels must be +1 / -1. Never throws on
/// non-convergence; check `converged`.
SmoResult solve_smo(std::span<const std::vector<double>> x, std::span<const int> y, const KernelParams& params,
                    const SmoOptions& opt = {});

/// solve_smo, throwing ConvergenceError when the budget runs out and
/// Error(Training) when only one label is present.
BinarySvm train_binary(std::span<const std::vector<double>> x, std::span<const int> y, const KernelParams& params,
                       const SmoOptions& opt = {});

/// Samples with class indices into `classes`.
struct LabeledSet {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const noexcept { return x.size(); }
  LabeledSet subset(std::span<const std::size_t> indices) const;
};

/// One machine per unordered class pair (first < second); positive decision
/// values vote for `first`.
struct PairMachine {
  int first = 0;
  int second = 1;
  BinarySvm svm;
};

struct SvmModel {
  std::vector<std::string> classes;
  FeatureLayout layout;
  std::string tree_b_rule;
  Standardizer standardizer;
  KernelParams params;
  std::vector<PairMachine> machines;

  /// Raw (unstandardized) features in, decision values out, one per machine.
  std::vector<double> decision_values(std::span<const double> raw) const;
  /// Majority vote; ties go to the class listed first.
  int predict_index(std::span<const double> raw) const;
  /// Checks the layout before predicting. Throws Error(Shape) on mismatch.
  const std::string& predict(const FeatureVector& v) const;
};

struct TrainStats {
  int machines = 0;
  int unconverged = 0;
};

/// Fits the standardizer on `data` and trains all k(k-1)/2 machines.
/// With strict = true a non-converged machine raises ConvergenceError.
SvmModel train_model(const LabeledSet& data, const FeatureLayout& layout, const KernelParams& params,
                     const SmoOptions& opt = {}, int jobs = 1, bool strict = true, TrainStats* stats = nullptr);

void write_model(std::ostream& out, const SvmModel& model);
SvmModel read_model(std::istream& in);
void save_model(const std::string& path, const SvmModel& model);
SvmModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Cross-validation

using Classifier = std::function<int(std::span<const double>)>;
using Trainer = std::function<Classifier(const LabeledSet& train)>;

struct CvReport {
  int folds = 0;
  std::vector<std::string> classes;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;  // trace / total
  std::vector<std::vector<long>> confusion;  // [true][predicted]
  int unconverged_machines = 0;

  friend bool operator==(const CvReport&, const CvReport&) = default;
};

/// Stratified fold assignment of units (samples or pages) with class labels
/// `unit_class`. Units of each class are shuffled with a seeded generator and
/// dealt round-robin, continuing the fold cursor across classes.
/// `min_per_class` is the smallest class size accepted (Error(Stratify) otherwise).
std::vector<int> stratified_folds(std::span<const int> unit_class, int num_classes, int folds, std::uint64_t seed,
                                  int min_per_class);

/// Runs a CV with a precomputed fold per sample.
CvReport cross_validate_assigned(const LabeledSet& data, std::span<const int> fold_of, int folds,
                                 const Trainer& trainer, int jobs = 1);

/// Sample-level stratified k-fold CV of an RBF SVM (each class needs >= folds samples).
CvReport cross_validate(const LabeledSet& data, const KernelParams& params, int folds, std::uint64_t seed,
                        const SmoOptions& opt = {}, int jobs = 1);

/// Trainer for the RBF one-vs-one SVM used by the CV helpers. Counts
/// non-converged machines into `unconverged` when given.
Trainer svm_trainer(const KernelParams& params, const SmoOptions& opt, std::atomic<int>* unconverged = nullptr);

std::vector<double> default_c_grid();      // 1, 10, ..., 1e6
std::vector<double> default_gamma_grid();  // 1e-6, ..., 1

struct GridCell {
  KernelParams params;
  double cv_accuracy = 0.0;
};

struct GridSearchResult {
  KernelParams best;
  double best_accuracy = 0.0;
  std::vector<GridCell> table;  // C-major, both grids ascending
};

/// Exhaustive (C, gamma) search by CV accuracy with the folds in `fold_of`.
/// Ties go to smaller C, then smaller gamma. Throws Error(Config) on an empty
/// grid or values outside the supported ranges.
GridSearchResult grid_search_assigned(const LabeledSet& data, std::span<const int> fold_of, int folds,
                                      std::vector<double> c_grid, std::vector<double> gamma_grid,
                                      const SmoOptions& opt = {}, int jobs = 1);

GridSearchResult grid_search(const LabeledSet& data, std::vector<double> c_grid, std::vector<double> gamma_grid,
                             int folds, std::uint64_t seed, const SmoOptions& opt = {}, int jobs = 1);

}  // namespace texwave
