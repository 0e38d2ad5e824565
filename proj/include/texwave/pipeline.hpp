#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "texwave/error.hpp"
#include "texwave/features.hpp"
#include "texwave/preprocess.hpp"
#include "texwave/svm.hpp"
#include "texwave/synth.hpp"

namespace texwave {

inline constexpr const char* kEmptyLabel = "EMPTY";
inline constexpr const char* kNoTextLabel = "NO_TEXT";
inline constexpr const char* kBoundaryToken = "*";

/// Process exit codes of the command-line tool.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitConvergence = 3 };
int exit_code_for(ErrorKind kind) noexcept;

struct Manifest {
  std::filesystem::path dir;  // paths in `rows` are relative to this
  std::vector<ManifestEntry> rows;

  std::filesystem::path resolve(const ManifestEntry& e) const { return dir / e.path; }
};

Manifest load_manifest(const std::filesystem::path& file);

/// Block grid of one page: features for non-empty blocks only.
struct PageFeatures {
  std::string path;
  int label = -1;
  int columns = 0;
  int rows = 0;
  std::vector<bool> empty;                    // per block, row-major
  std::vector<std::array<int, 2>> origins;    // per non-empty block
  std::vector<std::vector<double>> features;  // per non-empty block, row-major
};

PageFeatures page_features(const GrayImage& page, const BlockGridConfig& grid, const FeatureLayout& layout);

struct FeatureSet {
  FeatureLayout layout;
  BlockGridConfig grid;
  std::vector<std::string> classes;  // sorted
  std::vector<PageFeatures> pages;   // manifest order

  /// One sample per non-empty block; `page_of` receives the page index.
  LabeledSet samples(std::vector<int>* page_of = nullptr) const;
  std::vector<int> page_labels() const;
};

/// Loads and featurizes every page. Throws Error(Degenerate) listing all pages
/// whose blocks are all empty, and Error(Training) with fewer than two classes.
FeatureSet extract_manifest_features(const Manifest& m, const BlockGridConfig& grid, const FeatureLayout& layout,
                                     int jobs = 1);

/// One line per text block: `label,origin_x,origin_y,f1,...,fn` (%.17g).
std::string format_feature_dump(const FeatureSet& fs);

struct EvalOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> gamma_grid = default_gamma_grid();
  SmoOptions smo;
  int jobs = 1;
};

/// Page-level stratified folds: every block of a page lands in the page's fold.
/// Each class needs at least two pages.
std::vector<int> page_fold_of_samples(const FeatureSet& fs, int folds, std::uint64_t seed);

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> per_class_accuracy;
  double mean_accuracy = 0.0;
  std::vector<std::vector<long>> confusion;  // [true][predicted] block counts
  std::vector<double> fold_accuracy;
  int folds = 0;
  KernelParams params;
  int unconverged_machines = 0;
  std::string transform;
  int levels = 0;
  std::string layout;
  std::string tree_b_rule;
  std::string grid_search = "non-nested";  // parameters chosen by CV on the same folds
  nlohmann::json config;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Grid search over page-level folds, then the winning cell's CV confusion.
EvalReport evaluate(const FeatureSet& fs, const EvalOptions& opt, const nlohmann::json& config = {});

struct TrainResult {
  SvmModel model;
  GridSearchResult grid;
  TrainStats stats;
};

/// Grid search over page-level folds, then a strict fit on all blocks.
TrainResult train(const FeatureSet& fs, const EvalOptions& opt);

/// "c,gamma,cv_accuracy" header plus one row per cell.
std::string format_grid_table(const GridSearchResult& g);

struct BlockLabels {
  int columns = 0;
  int rows = 0;
  std::vector<std::string> labels;  // row-major; kEmptyLabel for empty blocks
  std::string majority;             // kNoTextLabel when every block is empty
};

/// Throws Error(Shape) when `model` was trained on a different layout.
void check_layout(const SvmModel& model, const FeatureLayout& requested);
BlockLabels predict_page(const SvmModel& model, const GrayImage& page, const BlockGridConfig& grid);

/// Rows of space-separated tokens.
std::string format_label_map(int columns, int rows, const std::vector<std::string>& labels);
/// Inverse of format_label_map; throws Error(Parse) on ragged rows.
BlockLabels parse_label_map(const std::string& text);
std::string format_truth(const CollageTruth& t, const std::vector<StyleSpec>& styles);

struct SegmentScore {
  long scored = 0;
  long correct = 0;
  double accuracy = 0.0;
};

/// Compares predictions with truth, skipping boundary tokens and empty blocks.
/// Throws Error(Shape) when the grids differ.
SegmentScore score_segmentation(const BlockLabels& predicted, const BlockLabels& truth);

struct EmphasisCells {
  double font_ok_style_ok = 0.0;  // percentages of blocks
  double font_ok_style_wrong = 0.0;
  double font_wrong_style_ok = 0.0;
  double font_wrong_style_wrong = 0.0;
};

/// Splits labels "<font>-<style>" at the last '-' and folds the confusion
/// matrix into the four font/style cells.
EmphasisCells emphasis_cells(const EvalReport& r);

struct AblationReport {
  EvalReport dtcwt;
  EvalReport dwt;
  EmphasisCells dtcwt_cells;
  EmphasisCells dwt_cells;
};

AblationReport ablation_dwt(const Manifest& m, const BlockGridConfig& grid, int levels, const EvalOptions& opt,
                            const nlohmann::json& config = {});
nlohmann::json to_json(const AblationReport& r);

struct TransferRow {
  int block_size = 0;
  long blocks = 0;
  double accuracy = 0.0;
  std::vector<std::vector<double>> confusion_percent;  // [true][predicted], sums to 100
};

inline const std::vector<int> kTransferSizes = {96, 144, 192, 240, 288, 336};

/// Classifies the manifest's pages at each square block size with `model`.
std::vector<TransferRow> block_transfer(const SvmModel& model, const Manifest& m, const std::vector<int>& sizes,
                                        double ink_threshold, int jobs = 1);
nlohmann::json to_json(const std::vector<TransferRow>& rows);

struct BenchRow {
  int side = 0;
  int runs = 0;
  double median_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<double> ratios;  // rows[i+1] / rows[i]
};

/// Keeps freed pages inside the process (glibc malloc tuning). Without it the
/// allocator unmaps large transform buffers after each block and every later
/// block pays the page faults again. Call once at program start; no-op on
/// other C libraries.
void retain_freed_memory() noexcept;

BenchReport bench_features(const FeatureLayout& layout, const std::vector<int>& sides, int runs, std::uint64_t seed);
nlohmann::json to_json(const BenchReport& r);

}  // namespace texwave
