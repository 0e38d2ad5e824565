#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "texwave/pipeline.hpp"
#include "texwave/wavelet.hpp"

using namespace texwave;
using nlohmann::json;

namespace {

struct Common {
  int block_w = 96;
  int block_h = 96;
  int stride_x = 0;
  int stride_y = 0;
  double ink_threshold = 0.05;
  std::string transform = "dtcwt";
  int levels = 3;
  int folds = 10;
  int max_passes = SmoOptions{}.max_passes;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> gamma_grid = default_gamma_grid();

  BlockGridConfig grid() const {
    BlockGridConfig g;
    g.block_width = block_w;
    g.block_height = block_h;
    g.stride_x = stride_x;
    g.stride_y = stride_y;
    g.ink_ratio_threshold = ink_threshold;
    g.validate();
    return g;
  }

  FeatureLayout layout() const {
    FeatureLayout l{parse_transform(transform), levels};
    const int side = min_transform_side(levels);
    if (block_w < side || block_h < side) {
      throw Error(ErrorKind::Config, std::to_string(levels) + " levels need blocks of at least " +
                                         std::to_string(side) + "x" + std::to_string(side));
    }
    return l;
  }

  EvalOptions eval() const {
    EvalOptions o;
    o.folds = folds;
    o.seed = seed;
    o.jobs = jobs;
    o.c_grid = c_grid;
    o.gamma_grid = gamma_grid;
    o.smo.max_passes = max_passes;
    return o;
  }

  json echo(const std::string& command, const std::string& input) const {
    return json{{"command", command},   {"input", input},         {"block_w", block_w},
                {"block_h", block_h},   {"stride_x", stride_x},   {"stride_y", stride_y},
                {"ink_threshold", ink_threshold}, {"transform", transform}, {"levels", levels},
                {"folds", folds},       {"seed", seed},           {"c_grid", c_grid},
                {"gamma_grid", gamma_grid}, {"max_passes", max_passes}};
  }
};

void add_block_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--block-w", c.block_w, "Block width in pixels")->check(CLI::Range(16, 4096));
  cmd->add_option("--block-h", c.block_h, "Block height in pixels")->check(CLI::Range(16, 4096));
  cmd->add_option("--stride-x", c.stride_x, "Horizontal stride (0 = block width)")->check(CLI::Range(0, 4096));
  cmd->add_option("--stride-y", c.stride_y, "Vertical stride (0 = block height)")->check(CLI::Range(0, 4096));
  cmd->add_option("--ink-threshold", c.ink_threshold, "Minimum ink/non-ink ratio of a text block")
      ->check(CLI::Range(0.0, 1.0));
}

void add_feature_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--transform", c.transform, "Feature transform")->check(CLI::IsMember({"dtcwt", "dwt"}));
  cmd->add_option("--levels", c.levels, "Decomposition levels")->check(CLI::Range(1, 6));
}

void add_cv_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--folds", c.folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  cmd->add_option("--c-grid", c.c_grid, "C values for the grid search")
      ->delimiter(',')
      ->check(CLI::Range(KernelParams::kMinC, KernelParams::kMaxC));
  cmd->add_option("--gamma-grid", c.gamma_grid, "gamma values for the grid search")
      ->delimiter(',')
      ->check(CLI::Range(KernelParams::kMinGamma, KernelParams::kMaxGamma));
  cmd->add_option("--max-passes", c.max_passes, "SMO iteration budget per training point")
      ->check(CLI::Range(0, 1000000));
}

void add_run_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1, 256));
  cmd->add_option("--out", c.out, "Output path (stdout when omitted, where allowed)");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::string& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  retain_freed_memory();
  CLI::App app{"Texture-based writing style classification"};
  app.require_subcommand(1);
  Common c;

  // gen-dataset
  int n_styles = 8;
  int pages = 4;
  int page_w = 384;
  int page_h = 384;
  bool emphases = false;
  std::string noise = "none";
  auto* gen = app.add_subcommand("gen-dataset", "Render a synthetic page set and its manifest");
  gen->add_option("--styles", n_styles, "Number of built-in base styles")->check(CLI::Range(2, 8));
  gen->add_option("--pages", pages, "Pages per style")->check(CLI::Range(1, 10000));
  gen->add_option("--noise", noise, "Noise regime")->check(CLI::IsMember({"none", "low", "high"}));
  gen->add_flag("--emphases", emphases, "Render regular/italic/bold/bolditalic variants of each style");
  gen->add_option("--width", page_w, "Page width")->check(CLI::Range(192, 16384));
  gen->add_option("--height", page_h, "Page height")->check(CLI::Range(192, 16384));
  add_run_flags(gen, c);

  // gen-collage
  int columns = 2;
  std::string truth_out;
  auto* gcol = app.add_subcommand("gen-collage", "Render a multi-style collage and its block ground truth");
  gcol->add_option("--styles", n_styles, "Number of built-in styles to pick regions from")->check(CLI::Range(2, 8));
  gcol->add_option("--regions", columns, "Side-by-side regions")->check(CLI::Range(2, 8));
  gcol->add_option("--width", page_w, "Page width")->check(CLI::Range(192, 16384));
  gcol->add_option("--height", page_h, "Page height")->check(CLI::Range(192, 16384));
  gcol->add_option("--truth", truth_out, "Ground-truth label map output")->required();
  add_block_flags(gcol, c);
  add_run_flags(gcol, c);

  // train
  std::string manifest;
  std::string model_path;
  std::string grid_out;
  auto* tr = app.add_subcommand("train", "Grid-search, train and save a model");
  tr->add_option("--manifest", manifest, "Manifest file")->required();
  tr->add_option("--model", model_path, "Model output path")->required();
  tr->add_option("--grid-out", grid_out, "Grid table output (default <model>.grid.csv)");
  add_block_flags(tr, c);
  add_feature_flags(tr, c);
  add_cv_flags(tr, c);
  add_run_flags(tr, c);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Page-level cross-validation report");
  ev->add_option("--manifest", manifest, "Manifest file")->required();
  add_block_flags(ev, c);
  add_feature_flags(ev, c);
  add_cv_flags(ev, c);
  add_run_flags(ev, c);

  // dump-features
  auto* df = app.add_subcommand("dump-features", "Write one feature line per text block");
  df->add_option("--manifest", manifest, "Manifest file")->required();
  add_block_flags(df, c);
  add_feature_flags(df, c);
  add_run_flags(df, c);

  // predict
  std::string image;
  auto* pr = app.add_subcommand("predict", "Label the blocks of one page");
  pr->add_option("--model", model_path, "Model file")->required();
  pr->add_option("--image", image, "Page image (P5 PGM)")->required();
  add_block_flags(pr, c);
  add_feature_flags(pr, c);
  add_run_flags(pr, c);

  // segment
  std::string truth;
  auto* sg = app.add_subcommand("segment", "Block label map of a collage, optionally scored");
  sg->add_option("--model", model_path, "Model file")->required();
  sg->add_option("--image", image, "Collage image (P5 PGM)")->required();
  sg->add_option("--truth", truth, "Ground-truth label map");
  add_block_flags(sg, c);
  add_feature_flags(sg, c);
  add_run_flags(sg, c);

  // ablation-dwt
  auto* ab = app.add_subcommand("ablation-dwt", "Identical CV with DT-CWT and DWT features");
  ab->add_option("--manifest", manifest, "Manifest of <font>-<style> labelled pages")->required();
  add_block_flags(ab, c);
  ab->add_option("--levels", c.levels, "Decomposition levels")->check(CLI::Range(1, 6));
  add_cv_flags(ab, c);
  add_run_flags(ab, c);

  // block-transfer
  std::vector<int> sizes = kTransferSizes;
  auto* bt = app.add_subcommand("block-transfer", "Accuracy of a model at several test block sizes");
  bt->add_option("--model", model_path, "Model file")->required();
  bt->add_option("--manifest", manifest, "Test manifest")->required();
  bt->add_option("--sizes", sizes, "Square block sizes")->delimiter(',')->check(CLI::Range(16, 4096));
  bt->add_option("--ink-threshold", c.ink_threshold, "Minimum ink/non-ink ratio of a text block")
      ->check(CLI::Range(0.0, 1.0));
  add_run_flags(bt, c);

  // bench
  int runs = 21;
  auto* bn = app.add_subcommand("bench", "Feature extraction timing at 128, 256 and 512 pixels");
  bn->add_option("--runs", runs, "Timed runs per size")->check(CLI::Range(20, 100000));
  add_feature_flags(bn, c);
  add_run_flags(bn, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      std::vector<StyleSpec> styles;
      for (const auto& base : builtin_styles(n_styles)) {
        if (emphases) {
          for (const auto& v : emphasis_variants(base)) styles.push_back(v);
        } else {
          styles.push_back(base);
        }
      }
      if (c.out.empty()) throw Error(ErrorKind::Config, "gen-dataset needs --out");
      DatasetOptions o;
      o.pages_per_style = pages;
      o.page_width = page_w;
      o.page_height = page_h;
      o.noise.regime = parse_noise_regime(noise);
      o.seed = c.seed;
      o.jobs = c.jobs;
      const auto rows = gen_dataset(styles, o, c.out);
      std::cerr << "wrote " << rows.size() << " pages and " << (std::filesystem::path(c.out) / "manifest.txt").string()
                << "\n";
    } else if (gcol->parsed()) {
      if (c.out.empty()) throw Error(ErrorKind::Config, "gen-collage needs --out");
      const auto styles = builtin_styles(n_styles);
      if (columns > n_styles) throw Error(ErrorKind::Config, "more regions than styles");
      const auto regions = split_layout(page_w, page_h, columns);
      const Collage col = make_collage(styles, page_w, page_h, regions, c.seed);
      write_pgm_file(c.out, col.page);
      emit(truth_out, format_truth(collage_truth(regions, page_w, page_h, c.grid()), styles));
    } else if (tr->parsed()) {
      const FeatureSet fs = extract_manifest_features(load_manifest(manifest), c.grid(), c.layout(), c.jobs);
      const TrainResult res = train(fs, c.eval());
      save_model(model_path, res.model);
      emit(grid_out.empty() ? model_path + ".grid.csv" : grid_out, format_grid_table(res.grid));
      std::fprintf(stderr, "best C=%.17g gamma=%.17g cv_accuracy=%.6f\n", res.grid.best.c, res.grid.best.gamma,
                   res.grid.best_accuracy);
    } else if (ev->parsed()) {
      const FeatureSet fs = extract_manifest_features(load_manifest(manifest), c.grid(), c.layout(), c.jobs);
      emit(c.out, dump(to_json(evaluate(fs, c.eval(), c.echo("evaluate", manifest)))));
    } else if (df->parsed()) {
      emit(c.out, format_feature_dump(extract_manifest_features(load_manifest(manifest), c.grid(), c.layout(), c.jobs)));
    } else if (pr->parsed() || sg->parsed()) {
      const SvmModel model = load_model(model_path);
      if (!(pr->parsed() ? pr : sg)->get_option("--transform")->empty() ||
          !(pr->parsed() ? pr : sg)->get_option("--levels")->empty()) {
        check_layout(model, c.layout());
      }
      const BlockLabels labels = predict_page(model, read_pgm_file(image), c.grid());
      std::string text = format_label_map(labels.columns, labels.rows, labels.labels);
      if (pr->parsed()) {
        emit(c.out, "blocks " + std::to_string(labels.columns) + " " + std::to_string(labels.rows) + "\n" + text +
                        "majority " + labels.majority + "\n");
      } else {
        emit(c.out, text);
        if (!truth.empty()) {
          const SegmentScore s = score_segmentation(labels, parse_label_map(read_text(truth)));
          std::printf("accuracy %.6f scored %ld correct %ld\n", s.accuracy, s.scored, s.correct);
        }
      }
    } else if (ab->parsed()) {
      json cfg = c.echo("ablation-dwt", manifest);
      cfg.erase("transform");
      emit(c.out, dump(to_json(ablation_dwt(load_manifest(manifest), c.grid(), c.levels, c.eval(), cfg))));
    } else if (bt->parsed()) {
      const SvmModel model = load_model(model_path);
      emit(c.out, dump(to_json(block_transfer(model, load_manifest(manifest), sizes, c.ink_threshold, c.jobs))));
    } else if (bn->parsed()) {
      emit(c.out, dump(to_json(bench_features(c.layout(), {128, 256, 512}, runs, c.seed))));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
