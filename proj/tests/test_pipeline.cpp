#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "texwave/error.hpp"
#include "texwave/pipeline.hpp"

using namespace texwave;
namespace fs = std::filesystem;

namespace {

struct SmallSet {
  fs::path dir;
  Manifest manifest;
};

// Two styles, three 384x384 pages each, written once per process.
const SmallSet& small_set() {
  static const SmallSet set = [] {
    SmallSet s;
    s.dir = fs::temp_directory_path() / "texwave_test_pipeline";
    fs::remove_all(s.dir);
    DatasetOptions opt;
    opt.pages_per_style = 3;
    opt.seed = 21;
    gen_dataset(builtin_styles(2), opt, s.dir);
    s.manifest = load_manifest(s.dir / "manifest.txt");
    return s;
  }();
  return set;
}

EvalOptions quick_options() {
  EvalOptions opt;
  opt.folds = 3;
  opt.seed = 2;
  opt.c_grid = {10.0, 100.0};
  opt.gamma_grid = {0.01, 0.1};
  return opt;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorKind::Config) == 1);
  CHECK(exit_code_for(ErrorKind::Convergence) == 3);
  CHECK(exit_code_for(ErrorKind::Io) == 2);
  CHECK(exit_code_for(ErrorKind::Shape) == 2);
  CHECK(exit_code_for(ErrorKind::Stratify) == 2);
}

TEST_CASE("manifest features and page folds") {
  const auto& set = small_set();
  const FeatureSet fs = extract_manifest_features(set.manifest, BlockGridConfig{}, FeatureLayout{});
  CHECK(fs.classes == std::vector<std::string>{"alder", "birch"});
  CHECK(fs.pages.size() == 6);
  for (const auto& p : fs.pages) {
    CHECK(p.columns == 4);
    CHECK(p.rows == 4);
    CHECK(!p.features.empty());
    CHECK(p.features.size() == p.origins.size());
  }
  std::vector<int> page_of;
  const LabeledSet s = fs.samples(&page_of);
  const auto folds = page_fold_of_samples(fs, 3, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (page_of[i] == page_of[j]) CHECK(folds[i] == folds[j]);
    }
  }
  CHECK(extract_manifest_features(set.manifest, BlockGridConfig{}, FeatureLayout{}, 4).pages[3].features ==
        fs.pages[3].features);
}

TEST_CASE("single-class and degenerate manifests are rejected") {
  const auto& set = small_set();
  Manifest one = set.manifest;
  one.rows.resize(3);
  try {
    extract_manifest_features(one, BlockGridConfig{}, FeatureLayout{});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Training);
  }
  Manifest blank = set.manifest;
  write_pgm_file(set.dir / "blank.pgm", GrayImage(384, 384, 1.0));
  blank.rows.push_back({"blank.pgm", "alder"});
  try {
    extract_manifest_features(blank, BlockGridConfig{}, FeatureLayout{});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(std::string(e.what()).find("blank.pgm") != std::string::npos);
  }
  Manifest missing = set.manifest;
  missing.rows.push_back({"nope.pgm", "alder"});
  try {
    extract_manifest_features(missing, BlockGridConfig{}, FeatureLayout{});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("evaluation report") {
  const auto& set = small_set();
  const FeatureSet fs = extract_manifest_features(set.manifest, BlockGridConfig{}, FeatureLayout{});
  const EvalReport r = evaluate(fs, quick_options(), nlohmann::json{{"note", "x"}});
  CHECK(r.folds == 3);
  CHECK(r.grid_search == "non-nested");
  CHECK(r.transform == "dtcwt");
  CHECK(r.levels == 3);
  for (std::size_t c = 0; c < fs.classes.size(); ++c) {
    long blocks = 0;
    for (const auto& p : fs.pages) {
      if (p.label == static_cast<int>(c)) blocks += static_cast<long>(p.features.size());
    }
    long row = 0;
    for (long v : r.confusion[c]) row += v;
    CHECK(row == blocks);
  }
  CHECK(r.mean_accuracy >= 0.9);
  const nlohmann::json j = to_json(r);
  CHECK(eval_report_from_json(j) == r);
  CHECK(eval_report_from_json(nlohmann::json::parse(j.dump())) == r);
  CHECK_THROWS_AS(eval_report_from_json(nlohmann::json{{"classes", 3}}), Error);

  EvalOptions too_many = quick_options();
  too_many.folds = 7;
  CHECK_THROWS_AS(evaluate(fs, too_many), Error);
}

TEST_CASE("training, persistence and prediction") {
  const auto& set = small_set();
  const FeatureSet fs = extract_manifest_features(set.manifest, BlockGridConfig{}, FeatureLayout{});
  const TrainResult t = train(fs, quick_options());
  CHECK(t.grid.table.size() == 4);
  const std::string table = format_grid_table(t.grid);
  CHECK(table.rfind("c,gamma,cv_accuracy\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);

  const fs::path model_path = set.dir / "m.model";
  save_model(model_path.string(), t.model);
  const SvmModel back = load_model(model_path.string());
  for (const auto& p : fs.pages) {
    for (const auto& f : p.features) CHECK(back.decision_values(f) == t.model.decision_values(f));
  }

  const GrayImage page = render_page(builtin_styles(2)[1], 384, 384, 999);
  const BlockLabels labels = predict_page(back, page, BlockGridConfig{});
  CHECK(labels.columns == 4);
  CHECK(labels.rows == 4);
  CHECK(labels.majority == "birch");

  const BlockLabels blank = predict_page(back, GrayImage(300, 200, 1.0), BlockGridConfig{});
  CHECK(blank.columns == 3);
  CHECK(blank.rows == 2);
  for (const auto& l : blank.labels) CHECK(l == kEmptyLabel);
  CHECK(blank.majority == kNoTextLabel);

  CHECK_NOTHROW(check_layout(back, FeatureLayout{}));
  try {
    check_layout(back, FeatureLayout{Transform::Dwt, 3});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Shape);
  }
}

TEST_CASE("label maps and segmentation scoring") {
  const std::vector<std::string> labels = {"a", "b", kEmptyLabel, "a", "a", "b"};
  const std::string text = format_label_map(3, 2, labels);
  CHECK(text == "a b EMPTY\na a b\n");
  const BlockLabels back = parse_label_map(text);
  CHECK(back.columns == 3);
  CHECK(back.rows == 2);
  CHECK(back.labels == labels);
  CHECK_THROWS_AS(parse_label_map("a b\na\n"), Error);

  const BlockLabels truth = parse_label_map("a * b\na b b\n");
  const SegmentScore s = score_segmentation(back, truth);
  CHECK(s.scored == 4);
  CHECK(s.correct == 3);
  CHECK(s.accuracy == 0.75);
  try {
    score_segmentation(back, parse_label_map("a b\na b\n"));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Shape);
  }

  CollageTruth t;
  t.columns = 2;
  t.rows = 1;
  t.label = {1, -1};
  CHECK(format_truth(t, builtin_styles(2)) == "birch *\n");
}

TEST_CASE("emphasis cells") {
  EvalReport r;
  r.classes = {"a-bold", "a-regular", "b-bold", "b-regular"};
  r.confusion = {{5, 1, 0, 0}, {2, 6, 0, 1}, {0, 0, 7, 0}, {0, 0, 3, 5}};
  const EmphasisCells e = emphasis_cells(r);
  CHECK(e.font_ok_style_ok == doctest::Approx(100.0 * 23 / 30));
  CHECK(e.font_ok_style_wrong == doctest::Approx(100.0 * 6 / 30));
  CHECK(e.font_wrong_style_ok == doctest::Approx(100.0 * 1 / 30));
  CHECK(e.font_wrong_style_wrong == doctest::Approx(0.0));
  CHECK(std::abs(e.font_ok_style_ok + e.font_ok_style_wrong + e.font_wrong_style_ok + e.font_wrong_style_wrong - 100) <=
        0.01);
  r.classes[0] = "plain";
  CHECK_THROWS_AS(emphasis_cells(r), Error);
}

TEST_CASE("block transfer table") {
  const auto& set = small_set();
  const FeatureSet fs = extract_manifest_features(set.manifest, BlockGridConfig{}, FeatureLayout{});
  const SvmModel m = train_model(fs.samples(), fs.layout, {10.0, 0.01});
  const auto rows = block_transfer(m, set.manifest, kTransferSizes, 0.05);
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].block_size == kTransferSizes[i]);
    double sum = 0;
    for (const auto& r : rows[i].confusion_percent) {
      for (double v : r) sum += v;
    }
    CHECK(std::abs(sum - 100.0) <= 1e-9);
  }
  CHECK(to_json(rows).at("rows").size() == 6);
  Manifest alien = set.manifest;
  alien.rows[0].label = "oak";
  CHECK_THROWS_AS(block_transfer(m, alien, kTransferSizes, 0.05), Error);
}

TEST_CASE("bench report shape") {
  const BenchReport b = bench_features(FeatureLayout{}, {64, 128}, 3, 1);
  REQUIRE(b.rows.size() == 2);
  CHECK(b.ratios.size() == 1);
  CHECK(b.rows[1].runs == 3);
  CHECK(b.rows[0].median_seconds > 0);
  const nlohmann::json j = to_json(b);
  CHECK(j.contains("rows"));
  CHECK(j.contains("ratios"));
}
