#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "texwave/error.hpp"
#include "texwave/parallel.hpp"
#include "texwave/rng.hpp"
#include "texwave/svm.hpp"

namespace texwave {

std::vector<int> stratified_folds(std::span<const int> unit_class, int num_classes, int folds, std::uint64_t seed,
                                  int min_per_class) {
  if (folds < 2) throw Error(ErrorKind::Config, "fold count must be >= 2");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t u = 0; u < unit_class.size(); ++u) {
    const int c = unit_class[u];
    if (c < 0 || c >= num_classes) throw Error(ErrorKind::Shape, "class index out of range");
    members[c].push_back(u);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (static_cast<int>(members[c].size()) < min_per_class) {
      throw Error(ErrorKind::Stratify, "class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                                           " units; stratified " + std::to_string(folds) + "-fold CV needs at least " +
                                           std::to_string(min_per_class));
    }
  }
  if (unit_class.size() < static_cast<std::size_t>(folds)) {
    throw Error(ErrorKind::Stratify, "only " + std::to_string(unit_class.size()) + " units for " +
                                         std::to_string(folds) + " folds");
  }
  std::vector<int> fold_of(unit_class.size(), -1);
  std::size_t cursor = 0;
  for (int c = 0; c < num_classes; ++c) {
    auto& m = members[c];
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    for (std::size_t i = m.size(); i > 1; --i) std::swap(m[i - 1], m[rng.below(i)]);
    for (std::size_t u : m) fold_of[u] = static_cast<int>(cursor++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

CvReport cross_validate_assigned(const LabeledSet& data, std::span<const int> fold_of, int folds,
                                 const Trainer& trainer, int jobs) {
  if (fold_of.size() != data.size()) throw Error(ErrorKind::Shape, "fold assignment length mismatch");
  const std::size_t k = data.classes.size();
  std::vector<std::vector<std::vector<long>>> fold_confusion(static_cast<std::size_t>(folds),
                                                             std::vector<std::vector<long>>(k, std::vector<long>(k, 0)));
  parallel_for(static_cast<std::size_t>(folds), jobs, [&](std::size_t f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == static_cast<int>(f) ? test : train).push_back(i);
    if (test.empty()) throw Error(ErrorKind::Stratify, "fold " + std::to_string(f) + " has no samples");
    const Classifier clf = trainer(data.subset(train));
    for (std::size_t i : test) ++fold_confusion[f][data.y[i]][clf(data.x[i])];
  });

  CvReport rep;
  rep.folds = folds;
  rep.classes = data.classes;
  rep.confusion.assign(k, std::vector<long>(k, 0));
  long correct = 0;
  long total = 0;
  for (const auto& conf : fold_confusion) {
    long fc = 0;
    long ft = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        rep.confusion[a][b] += conf[a][b];
        ft += conf[a][b];
        if (a == b) fc += conf[a][b];
      }
    }
    rep.fold_accuracy.push_back(static_cast<double>(fc) / static_cast<double>(ft));
    correct += fc;
    total += ft;
  }
  rep.mean_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return rep;
}

Trainer svm_trainer(const KernelParams& params, const SmoOptions& opt, std::atomic<int>* unconverged) {
  return [params, opt, unconverged](const LabeledSet& train) -> Classifier {
    TrainStats stats;
    auto model = std::make_shared<SvmModel>(train_model(train, FeatureLayout{}, params, opt, 1, false, &stats));
    if (unconverged) *unconverged += stats.unconverged;
    return [model](std::span<const double> v) { return model->predict_index(v); };
  };
}

CvReport cross_validate(const LabeledSet& data, const KernelParams& params, int folds, std::uint64_t seed,
                        const SmoOptions& opt, int jobs) {
  const std::vector<int> fold_of =
      stratified_folds(data.y, static_cast<int>(data.classes.size()), folds, seed, folds);
  std::atomic<int> unconverged{0};
  CvReport rep = cross_validate_assigned(data, fold_of, folds, svm_trainer(params, opt, &unconverged), jobs);
  rep.unconverged_machines = unconverged;
  return rep;
}

std::vector<double> default_c_grid() { return {1, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6}; }
std::vector<double> default_gamma_grid() { return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1}; }

namespace {

void normalize_grid(std::vector<double>& grid, double lo, double hi, const char* name) {
  if (grid.empty()) throw Error(ErrorKind::Config, std::string("empty ") + name + " grid");
  for (double v : grid) {
    // Small slack so decimal literals such as 1e-6 at the range ends pass.
    if (!(v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9))) {
      throw Error(ErrorKind::Config, std::string(name) + " value " + std::to_string(v) + " outside [" +
                                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
}

}  // namespace

GridSearchResult grid_search_assigned(const LabeledSet& data, std::span<const int> fold_of, int folds,
                                      std::vector<double> c_grid, std::vector<double> gamma_grid,
                                      const SmoOptions& opt, int jobs) {
  normalize_grid(c_grid, KernelParams::kMinC, KernelParams::kMaxC, "C");
  normalize_grid(gamma_grid, KernelParams::kMinGamma, KernelParams::kMaxGamma, "gamma");
  GridSearchResult res;
  for (double c : c_grid) {
    for (double g : gamma_grid) res.table.push_back({{c, g}, 0.0});
  }
  parallel_for(res.table.size(), jobs, [&](std::size_t i) {
    res.table[i].cv_accuracy =
        cross_validate_assigned(data, fold_of, folds, svm_trainer(res.table[i].params, opt), 1).mean_accuracy;
  });
  res.best = res.table.front().params;
  res.best_accuracy = res.table.front().cv_accuracy;
  for (const GridCell& cell : res.table) {
    if (cell.cv_accuracy > res.best_accuracy) {
      res.best_accuracy = cell.cv_accuracy;
      res.best = cell.params;
    }
  }
  return res;
}

GridSearchResult grid_search(const LabeledSet& data, std::vector<double> c_grid, std::vector<double> gamma_grid,
                             int folds, std::uint64_t seed, const SmoOptions& opt, int jobs) {
  const std::vector<int> fold_of =
      stratified_folds(data.y, static_cast<int>(data.classes.size()), folds, seed, folds);
  return grid_search_assigned(data, fold_of, folds, std::move(c_grid), std::move(gamma_grid), opt, jobs);
}

}  // namespace texwave
