#include "texwave/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "texwave/parallel.hpp"
#include "texwave/rng.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return kExitUsage;
    case ErrorKind::Convergence: return kExitConvergence;
    default: return kExitData;
  }
}

Manifest load_manifest(const std::filesystem::path& file) {
  const auto bytes = read_bytes(file);
  Manifest m;
  m.dir = file.parent_path();
  try {
    m.rows = parse_manifest(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(e.kind(), file.string() + ": " + e.what());
  }
  if (m.rows.empty()) throw Error(ErrorKind::Parse, file.string() + ": manifest is empty");
  return m;
}

PageFeatures page_features(const GrayImage& page, const BlockGridConfig& grid, const FeatureLayout& layout) {
  const PageBlocks pb = page_blocks(page, grid);
  PageFeatures pf;
  pf.columns = pb.columns;
  pf.rows = pb.rows;
  pf.empty = pb.empty;
  for (std::size_t i = 0; i < pb.blocks.size(); ++i) {
    if (pb.empty[i]) continue;
    pf.origins.push_back({pb.blocks[i].origin_x, pb.blocks[i].origin_y});
    pf.features.push_back(extract_features(pb.blocks[i].pixels, layout).values);
  }
  return pf;
}

LabeledSet FeatureSet::samples(std::vector<int>* page_of) const {
  LabeledSet s;
  s.classes = classes;
  if (page_of) page_of->clear();
  for (std::size_t p = 0; p < pages.size(); ++p) {
    for (const auto& f : pages[p].features) {
      s.x.push_back(f);
      s.y.push_back(pages[p].label);
      if (page_of) page_of->push_back(static_cast<int>(p));
    }
  }
  return s;
}

std::vector<int> FeatureSet::page_labels() const {
  std::vector<int> out;
  for (const auto& p : pages) out.push_back(p.label);
  return out;
}

FeatureSet extract_manifest_features(const Manifest& m, const BlockGridConfig& grid, const FeatureLayout& layout,
                                     int jobs) {
  grid.validate();
  FeatureSet fs;
  fs.layout = layout;
  fs.grid = grid;
  for (const auto& r : m.rows) fs.classes.push_back(r.label);
  std::sort(fs.classes.begin(), fs.classes.end());
  fs.classes.erase(std::unique(fs.classes.begin(), fs.classes.end()), fs.classes.end());
  if (fs.classes.size() < 2) {
    throw Error(ErrorKind::Training, "manifest has " + std::to_string(fs.classes.size()) + " class; need at least 2");
  }

  fs.pages.resize(m.rows.size());
  parallel_for(m.rows.size(), jobs, [&](std::size_t i) {
    const auto& row = m.rows[i];
    GrayImage img;
    try {
      img = read_pgm_file(m.resolve(row));
    } catch (const Error& e) {
      throw Error(e.kind(), row.path + ": " + e.what());
    }
    PageFeatures pf = page_features(img, grid, layout);
    pf.path = row.path;
    pf.label = static_cast<int>(std::lower_bound(fs.classes.begin(), fs.classes.end(), row.label) - fs.classes.begin());
    fs.pages[i] = std::move(pf);
  });

  std::string degenerate;
  for (const auto& p : fs.pages) {
    if (p.features.empty()) degenerate += (degenerate.empty() ? "" : ", ") + p.path;
  }
  if (!degenerate.empty()) throw Error(ErrorKind::Degenerate, "pages without any text block: " + degenerate);
  return fs;
}

std::string format_feature_dump(const FeatureSet& fs) {
  std::string out;
  char buf[40];
  for (const auto& p : fs.pages) {
    for (std::size_t b = 0; b < p.features.size(); ++b) {
      out += fs.classes[p.label] + "," + std::to_string(p.origins[b][0]) + "," + std::to_string(p.origins[b][1]);
      for (double v : p.features[b]) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<int> page_fold_of_samples(const FeatureSet& fs, int folds, std::uint64_t seed) {
  const std::vector<int> page_fold =
      stratified_folds(fs.page_labels(), static_cast<int>(fs.classes.size()), folds, seed, 2);
  std::vector<int> out;
  for (std::size_t p = 0; p < fs.pages.size(); ++p) out.insert(out.end(), fs.pages[p].features.size(), page_fold[p]);
  return out;
}

namespace {

EvalReport report_from_cv(const FeatureSet& fs, const CvReport& cv, const KernelParams& params,
                          const json& config) {
  EvalReport r;
  r.classes = cv.classes;
  r.confusion = cv.confusion;
  r.mean_accuracy = cv.mean_accuracy;
  r.fold_accuracy = cv.fold_accuracy;
  r.folds = cv.folds;
  r.params = params;
  r.unconverged_machines = cv.unconverged_machines;
  for (std::size_t c = 0; c < r.confusion.size(); ++c) {
    long row = 0;
    for (long v : r.confusion[c]) row += v;
    r.per_class_accuracy.push_back(row ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(row) : 0.0);
  }
  r.transform = to_string(fs.layout.transform);
  r.levels = fs.layout.levels;
  r.layout = fs.layout.tag();
  r.tree_b_rule = to_string(filter_bank().tree_b_rule);
  r.config = config.is_null() ? json::object() : config;
  return r;
}

}  // namespace

EvalReport evaluate(const FeatureSet& fs, const EvalOptions& opt, const json& config) {
  const LabeledSet data = fs.samples();
  const std::vector<int> fold_of = page_fold_of_samples(fs, opt.folds, opt.seed);
  const GridSearchResult g =
      grid_search_assigned(data, fold_of, opt.folds, opt.c_grid, opt.gamma_grid, opt.smo, opt.jobs);
  std::atomic<int> unconverged{0};
  CvReport cv = cross_validate_assigned(data, fold_of, opt.folds, svm_trainer(g.best, opt.smo, &unconverged), opt.jobs);
  cv.unconverged_machines = unconverged;
  return report_from_cv(fs, cv, g.best, config);
}

json to_json(const EvalReport& r) {
  return json{{"classes", r.classes},
              {"per_class_accuracy", r.per_class_accuracy},
              {"mean_accuracy", r.mean_accuracy},
              {"confusion", r.confusion},
              {"fold_accuracy", r.fold_accuracy},
              {"folds", r.folds},
              {"c", r.params.c},
              {"gamma", r.params.gamma},
              {"unconverged_machines", r.unconverged_machines},
              {"transform", r.transform},
              {"levels", r.levels},
              {"layout", r.layout},
              {"tree_b_rule", r.tree_b_rule},
              {"grid_search", r.grid_search},
              {"config", r.config}};
}

EvalReport eval_report_from_json(const json& j) {
  try {
    EvalReport r;
    j.at("classes").get_to(r.classes);
    j.at("per_class_accuracy").get_to(r.per_class_accuracy);
    j.at("mean_accuracy").get_to(r.mean_accuracy);
    j.at("confusion").get_to(r.confusion);
    j.at("fold_accuracy").get_to(r.fold_accuracy);
    j.at("folds").get_to(r.folds);
    j.at("c").get_to(r.params.c);
    j.at("gamma").get_to(r.params.gamma);
    j.at("unconverged_machines").get_to(r.unconverged_machines);
    j.at("transform").get_to(r.transform);
    j.at("levels").get_to(r.levels);
    j.at("layout").get_to(r.layout);
    j.at("tree_b_rule").get_to(r.tree_b_rule);
    j.at("grid_search").get_to(r.grid_search);
    r.config = j.at("config");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("evaluation report: ") + e.what());
  }
}

TrainResult train(const FeatureSet& fs, const EvalOptions& opt) {
  TrainResult out;
  const LabeledSet data = fs.samples();
  const std::vector<int> fold_of = page_fold_of_samples(fs, opt.folds, opt.seed);
  out.grid = grid_search_assigned(data, fold_of, opt.folds, opt.c_grid, opt.gamma_grid, opt.smo, opt.jobs);
  out.model = train_model(data, fs.layout, out.grid.best, opt.smo, opt.jobs, true, &out.stats);
  return out;
}

std::string format_grid_table(const GridSearchResult& g) {
  std::string out = "c,gamma,cv_accuracy\n";
  char buf[96];
  for (const auto& cell : g.table) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", cell.params.c, cell.params.gamma, cell.cv_accuracy);
    out += buf;
  }
  return out;
}

void check_layout(const SvmModel& model, const FeatureLayout& requested) {
  if (!(model.layout == requested)) {
    throw Error(ErrorKind::Shape, "layout mismatch: model is " + to_string(model.layout.transform) + " with " +
                                      std::to_string(model.layout.levels) + " levels, request is " +
                                      to_string(requested.transform) + " with " + std::to_string(requested.levels) +
                                      " levels");
  }
}

BlockLabels predict_page(const SvmModel& model, const GrayImage& page, const BlockGridConfig& grid) {
  const PageFeatures pf = page_features(page, grid, model.layout);
  BlockLabels out;
  out.columns = pf.columns;
  out.rows = pf.rows;
  std::vector<long> votes(model.classes.size(), 0);
  std::size_t next = 0;
  for (bool empty : pf.empty) {
    if (empty) {
      out.labels.push_back(kEmptyLabel);
      continue;
    }
    const int k = model.predict_index(pf.features[next++]);
    ++votes[k];
    out.labels.push_back(model.classes[k]);
  }
  const auto best = std::max_element(votes.begin(), votes.end());
  out.majority = *best == 0 ? kNoTextLabel : model.classes[best - votes.begin()];
  return out;
}

std::string format_label_map(int columns, int rows, const std::vector<std::string>& labels) {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < columns; ++c) {
      if (c) out += ' ';
      out += labels[static_cast<std::size_t>(r) * columns + c];
    }
    out += '\n';
  }
  return out;
}

BlockLabels parse_label_map(const std::string& text) {
  BlockLabels m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    int n = 0;
    while (ls >> tok) {
      m.labels.push_back(tok);
      ++n;
    }
    if (n == 0) continue;
    if (m.rows == 0) m.columns = n;
    if (n != m.columns) {
      throw Error(ErrorKind::Parse, "label map row " + std::to_string(m.rows + 1) + " has " + std::to_string(n) +
                                        " entries, expected " + std::to_string(m.columns));
    }
    ++m.rows;
  }
  return m;
}

std::string format_truth(const CollageTruth& t, const std::vector<StyleSpec>& styles) {
  std::vector<std::string> labels;
  for (int l : t.label) labels.push_back(l < 0 ? kBoundaryToken : styles[l].id);
  return format_label_map(t.columns, t.rows, labels);
}

SegmentScore score_segmentation(const BlockLabels& predicted, const BlockLabels& truth) {
  if (predicted.columns != truth.columns || predicted.rows != truth.rows) {
    throw Error(ErrorKind::Shape, "truth grid is " + std::to_string(truth.columns) + "x" + std::to_string(truth.rows) +
                                      " but the page has " + std::to_string(predicted.columns) + "x" +
                                      std::to_string(predicted.rows) + " blocks");
  }
  SegmentScore s;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == kBoundaryToken || predicted.labels[i] == kEmptyLabel) continue;
    ++s.scored;
    if (predicted.labels[i] == truth.labels[i]) ++s.correct;
  }
  s.accuracy = s.scored ? static_cast<double>(s.correct) / static_cast<double>(s.scored) : 0.0;
  return s;
}

EmphasisCells emphasis_cells(const EvalReport& r) {
  auto split = [](const std::string& label) {
    const auto dash = label.rfind('-');
    if (dash == std::string::npos) {
      throw Error(ErrorKind::Parse, "label '" + label + "' is not of the form <font>-<style>");
    }
    return std::pair{label.substr(0, dash), label.substr(dash + 1)};
  };
  double cells[4] = {0, 0, 0, 0};
  double total = 0;
  for (std::size_t a = 0; a < r.classes.size(); ++a) {
    const auto [fa, sa] = split(r.classes[a]);
    for (std::size_t b = 0; b < r.classes.size(); ++b) {
      const auto [fb, sb] = split(r.classes[b]);
      const double n = static_cast<double>(r.confusion[a][b]);
      cells[(fa == fb ? 0 : 2) + (sa == sb ? 0 : 1)] += n;
      total += n;
    }
  }
  EmphasisCells e;
  if (total > 0) {
    e.font_ok_style_ok = 100.0 * cells[0] / total;
    e.font_ok_style_wrong = 100.0 * cells[1] / total;
    e.font_wrong_style_ok = 100.0 * cells[2] / total;
    e.font_wrong_style_wrong = 100.0 * cells[3] / total;
  }
  return e;
}

AblationReport ablation_dwt(const Manifest& m, const BlockGridConfig& grid, int levels, const EvalOptions& opt,
                            const json& config) {
  AblationReport r;
  const FeatureSet cwt = extract_manifest_features(m, grid, {Transform::Dtcwt, levels}, opt.jobs);
  r.dtcwt = evaluate(cwt, opt, config);
  const FeatureSet dwt = extract_manifest_features(m, grid, {Transform::Dwt, levels}, opt.jobs);
  r.dwt = evaluate(dwt, opt, config);
  r.dtcwt_cells = emphasis_cells(r.dtcwt);
  r.dwt_cells = emphasis_cells(r.dwt);
  return r;
}

namespace {

json cells_json(const EmphasisCells& e) {
  return json{{"font_correct_style_correct", e.font_ok_style_ok},
              {"font_correct_style_wrong", e.font_ok_style_wrong},
              {"font_wrong_style_correct", e.font_wrong_style_ok},
              {"font_wrong_style_wrong", e.font_wrong_style_wrong}};
}

}  // namespace

json to_json(const AblationReport& r) {
  return json{{"dtcwt", {{"report", to_json(r.dtcwt)}, {"cells", cells_json(r.dtcwt_cells)}}},
              {"dwt", {{"report", to_json(r.dwt)}, {"cells", cells_json(r.dwt_cells)}}}};
}

std::vector<TransferRow> block_transfer(const SvmModel& model, const Manifest& m, const std::vector<int>& sizes,
                                        double ink_threshold, int jobs) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < model.classes.size(); ++i) index[model.classes[i]] = static_cast<int>(i);
  for (const auto& row : m.rows) {
    if (!index.count(row.label)) throw Error(ErrorKind::Shape, "label '" + row.label + "' is unknown to the model");
  }
  std::vector<GrayImage> pages(m.rows.size());
  parallel_for(m.rows.size(), jobs, [&](std::size_t i) { pages[i] = read_pgm_file(m.resolve(m.rows[i])); });

  const std::size_t k = model.classes.size();
  std::vector<TransferRow> out;
  for (int size : sizes) {
    BlockGridConfig grid;
    grid.block_width = grid.block_height = size;
    grid.ink_ratio_threshold = ink_threshold;
    grid.validate();
    std::vector<std::vector<std::vector<long>>> per_page(pages.size(), std::vector<std::vector<long>>(k, std::vector<long>(k, 0)));
    parallel_for(pages.size(), jobs, [&](std::size_t i) {
      if (pages[i].width() < size || pages[i].height() < size) return;
      const PageFeatures pf = page_features(pages[i], grid, model.layout);
      const int truth = index.at(m.rows[i].label);
      for (const auto& f : pf.features) ++per_page[i][truth][model.predict_index(f)];
    });
    std::vector<std::vector<long>> conf(k, std::vector<long>(k, 0));
    long total = 0;
    long correct = 0;
    for (const auto& pc : per_page) {
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          conf[a][b] += pc[a][b];
          total += pc[a][b];
          if (a == b) correct += pc[a][b];
        }
      }
    }
    if (total == 0) throw Error(ErrorKind::Size, "no text blocks of size " + std::to_string(size) + " in the test pages");
    TransferRow row;
    row.block_size = size;
    row.blocks = total;
    row.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    row.confusion_percent.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) row.confusion_percent[a][b] = 100.0 * conf[a][b] / static_cast<double>(total);
    }
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const std::vector<TransferRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"block_size", r.block_size},
                   {"blocks", r.blocks},
                   {"accuracy", r.accuracy},
                   {"confusion_percent", r.confusion_percent}});
  }
  return json{{"rows", arr}};
}

void retain_freed_memory() noexcept {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

BenchReport bench_features(const FeatureLayout& layout, const std::vector<int>& sides, int runs, std::uint64_t seed) {
  if (runs < 1) throw Error(ErrorKind::Config, "bench needs at least one run");
  BenchReport rep;
  for (int side : sides) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(side)));
    Plane block(side, side);
    for (double& v : block.data) v = rng.uniform();
    std::vector<double> times;
    volatile double sink = 0;
    extract_features(block, layout);  // warm-up
    for (int r = 0; r < runs; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const FeatureVector fv = extract_features(block, layout);
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + fv.values[0];
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::nth_element(times.begin(), times.begin() + runs / 2, times.end());
    rep.rows.push_back({side, runs, times[static_cast<std::size_t>(runs / 2)]});
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    rep.ratios.push_back(rep.rows[i].median_seconds / rep.rows[i - 1].median_seconds);
  }
  return rep;
}

json to_json(const BenchReport& r) {
  json rows = json::array();
  for (const auto& b : r.rows) rows.push_back({{"side", b.side}, {"runs", b.runs}, {"median_seconds", b.median_seconds}});
  return json{{"rows", rows}, {"ratios", r.ratios}};
}

}  // namespace texwave
