// Command-line front end: train, extract, eval, benchmark, ablate, synth.

#include <sopool/sopool.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace sopool;

struct ConfigFlags {
  PipelineConfig cfg;
  std::string grids = format_grids(PipelineConfig{}.grids);
  std::string encoding = "encode";
  std::string l2 = "true";
  std::string normalize_atoms = "true";

  void add(CLI::App* app) {
    app->add_option("--target-side", cfg.target_side, "Resized image height (and width unless --target-cols)")
        ->capture_default_str();
    app->add_option("--target-cols", cfg.target_cols, "Resized image width; 0 keeps images square")
        ->capture_default_str();
    app->add_option("--patch-side", cfg.patch_side, "Patch side r in pixels")->capture_default_str();
    app->add_option("--stride", cfg.stride, "Patch stride s in pixels")->capture_default_str();
    app->add_option("--dict-size", cfg.dict_size, "Number of K-means atoms K")->capture_default_str();
    app->add_option("--alpha", cfg.alpha, "Soft-threshold alpha")->capture_default_str();
    app->add_option("--grids", grids, "Pyramid grid sides, comma separated")->capture_default_str();
    app->add_option("--eps-zca", cfg.eps_zca, "ZCA eigenvalue regularizer")->capture_default_str();
    app->add_option("--eps-spd", cfg.eps_spd, "Ridge added to pooled matrices before the log")
        ->capture_default_str();
    app->add_option("--lambda", cfg.lambda, "Ridge regression regularizer")->capture_default_str();
    app->add_option("--l2-normalize", l2, "L2-normalize descriptors (true|false)")->capture_default_str();
    app->add_option("--encoding", encoding, "encode | passthrough")
        ->check(CLI::IsMember({"encode", "passthrough"}))
        ->capture_default_str();
    app->add_option("--seed", cfg.seed, "Seed for splits, patch sampling and K-means")->capture_default_str();
    app->add_option("--runs", cfg.runs, "Number of random splits")->capture_default_str();
    app->add_option("--train-per-subject", cfg.train_per_subject, "Training images per subject")
        ->capture_default_str();
    app->add_option("--test-per-subject", cfg.test_per_subject, "Test images per subject")->capture_default_str();
    app->add_option("--kmeans-iters", cfg.kmeans_iters, "Maximum Lloyd iterations")->capture_default_str();
    app->add_option("--normalize-atoms", normalize_atoms, "Unit-normalize atoms (true|false)")
        ->capture_default_str();
    app->add_option("--max-sample-patches", cfg.max_sample_patches, "Patch sample cap for ZCA and K-means")
        ->capture_default_str();
    app->add_flag("--shared-dictionary", cfg.shared_dictionary, "Reuse run 0's whitening and dictionary");
  }

  PipelineConfig resolve() {
    set_config_value(cfg, "grids", grids);
    set_config_value(cfg, "encoding", encoding);
    set_config_value(cfg, "l2_normalize", l2);
    set_config_value(cfg, "normalize_atoms", normalize_atoms);
    cfg.validate();
    return cfg;
  }
};

Corpus load(const std::string& dir, const PipelineConfig& cfg) {
  Corpus c = load_corpus(dir, cfg.target_side, cfg.target_cols);
  for (const auto& f : c.failures) std::cerr << "warning: skipped " << f.path << ": " << f.message << '\n';
  return c;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("report", "cannot write " + path);
  out << j.dump(2) << '\n';
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  for (int v : parse_grids(s)) out.push_back(static_cast<T>(v));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order pooling face identification"};
  app.require_subcommand(1);

  // train
  ConfigFlags train_flags;
  std::string train_corpus, train_out;
  auto* train = app.add_subcommand("train", "Fit a model on every image of a corpus");
  train->add_option("--corpus", train_corpus, "Corpus root (one directory per subject)")->required();
  train->add_option("--out", train_out, "Model file to write")->required();
  train_flags.add(train);

  // extract
  std::string extract_model, extract_image, extract_out;
  auto* extract = app.add_subcommand("extract", "Write the pooled descriptor of one image");
  extract->add_option("--model", extract_model, "Model file")->required();
  extract->add_option("--image", extract_image, "PGM or PNG image")->required();
  extract->add_option("--out", extract_out, "Descriptor file to write (SOPD)")->required();

  // eval
  std::string eval_model, eval_gallery, eval_probe, eval_json;
  auto* eval = app.add_subcommand("eval", "Score a probe set; with --gallery, re-enroll the classifier first");
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--gallery", eval_gallery, "Gallery corpus used to retrain the ridge classifier");
  eval->add_option("--probe", eval_probe, "Probe corpus")->required();
  eval->add_option("--json", eval_json, "Write the evaluation as JSON");

  // benchmark
  ConfigFlags bench_flags;
  std::string bench_corpus, bench_json, bench_manifest;
  bool bench_timings = false;
  auto* bench = app.add_subcommand("benchmark", "Random split protocol, mean and std over runs");
  bench->add_option("--corpus", bench_corpus, "Corpus root")->required();
  bench->add_option("--json", bench_json, "Write the report as JSON");
  bench->add_option("--manifest", bench_manifest, "Write the split manifest (run,role,subject,path)");
  bench->add_flag("--timings", bench_timings, "Include per-stage wall clock in the output");
  bench_flags.add(bench);

  // ablate
  ConfigFlags ablate_flags;
  std::string ablate_corpus, ablate_mode, ablate_json, ablate_csv;
  std::string ablate_sizes = "5,10,20,40", ablate_depths = "3,4,5";
  bool ablate_timings = false;
  auto* ablate = app.add_subcommand("ablate", "Encoding on/off or dictionary size x pyramid depth");
  ablate->add_option("mode", ablate_mode, "encoding | grid")->required()->check(CLI::IsMember({"encoding", "grid"}));
  ablate->add_option("--corpus", ablate_corpus, "Corpus root")->required();
  ablate->add_option("--json", ablate_json, "Write the result as JSON");
  ablate->add_option("--csv", ablate_csv, "Write the grid table as CSV (grid mode)");
  ablate->add_option("--dict-sizes", ablate_sizes, "Dictionary sizes (grid mode)")->capture_default_str();
  ablate->add_option("--depths", ablate_depths, "Pyramid depths (grid mode)")->capture_default_str();
  ablate->add_flag("--timings", ablate_timings, "Include per-stage wall clock in the output");
  ablate_flags.add(ablate);

  // synth
  SynthSpec synth_spec;
  std::string synth_out, synth_kind = "identity";
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic corpus");
  synth->add_option("--subjects", synth_spec.subjects, "Number of subjects")->capture_default_str();
  synth->add_option("--per-subject", synth_spec.per_subject, "Images per subject")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_spec.seed, "Seed")->capture_default_str();
  synth->add_option("--side", synth_spec.side, "Image side in pixels")->capture_default_str();
  synth->add_option("--kind", synth_kind, "identity | texture")
      ->check(CLI::IsMember({"identity", "texture"}))
      ->capture_default_str();
  synth->add_option("--noise", synth_spec.noise, "Pixel noise standard deviation")->capture_default_str();
  synth->add_option("--max-shift", synth_spec.max_shift, "Maximum per-image shift in pixels")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const PipelineConfig cfg = train_flags.resolve();
      const Corpus corpus = load(train_corpus, cfg);
      const Model model = fit_pipeline(corpus.images, cfg);
      save_model(train_out, model);
      std::cout << "trained on " << corpus.images.size() << " images, " << model.ridge.classes.size()
                << " subjects; descriptor dimension " << model.extractor.descriptor_dim() << '\n';
    } else if (*extract) {
      const Model model = load_model(extract_model);
      const auto& cfg = model.config();
      const GrayImage img = with_stage("dataset", [&] {
        return load_image(extract_image, "", cfg.target_side, cfg.image_cols());
      });
      const PooledDescriptor d = model.extractor.describe(img.pixels);
      std::ofstream out(extract_out, std::ios::binary);
      if (!out) throw Error("extract", "cannot write " + extract_out);
      write_descriptor(out, d);
      std::cout << "wrote " << d.values.size() << " values (" << d.cells << " cells, code width " << d.code_width
                << ")\n";
    } else if (*eval) {
      Model model = load_model(eval_model);
      if (!eval_gallery.empty()) {
        const Corpus gallery = load(eval_gallery, model.config());
        model.ridge = enroll(model.extractor, gallery.images, all_indices(gallery.images.size()));
        std::cout << "enrolled " << gallery.images.size() << " gallery images\n";
      }
      const Corpus probe = load(eval_probe, model.config());
      const Evaluation ev = evaluate(model, probe.images);
      std::printf("accuracy: %.2f%% (%zu/%zu)\n", 100.0 * ev.accuracy, ev.correct, ev.total);
      if (!eval_json.empty()) {
        nlohmann::ordered_json j;
        j["accuracy"] = ev.accuracy;
        j["correct"] = ev.correct;
        j["total"] = ev.total;
        j["confusion"] = {{"labels", ev.confusion.labels}, {"counts", ev.confusion.counts}};
        write_json(eval_json, j);
      }
    } else if (*bench) {
      const PipelineConfig cfg = bench_flags.resolve();
      const Corpus corpus = load(bench_corpus, cfg);
      if (!bench_manifest.empty()) {
        std::ofstream m(bench_manifest);
        if (!m) throw Error("report", "cannot write " + bench_manifest);
        write_split_manifest(m, corpus.images, make_splits(corpus.images, split_spec(cfg)));
      }
      const BenchmarkReport report = benchmark(corpus.images, cfg);
      write_text(std::cout, report, bench_timings);
      write_json(bench_json, to_json(report, bench_timings));
    } else if (*ablate) {
      const PipelineConfig cfg = ablate_flags.resolve();
      const Corpus corpus = load(ablate_corpus, cfg);
      if (ablate_mode == "encoding") {
        const EncodingAblation a = ablate_encoding(corpus.images, cfg);
        std::cout << "with encoding:    " << percent_pm(a.with_encoding.mean, a.with_encoding.std) << " %\n"
                  << "without encoding: " << percent_pm(a.without_encoding.mean, a.without_encoding.std) << " %\n";
        write_json(ablate_json, to_json(a, ablate_timings));
      } else {
        const GridAblation g =
            ablate_grid(corpus.images, cfg, parse_list<int>(ablate_sizes), parse_list<std::size_t>(ablate_depths));
        write_grid_csv(std::cout, g);
        if (!ablate_csv.empty()) {
          std::ofstream out(ablate_csv);
          if (!out) throw Error("report", "cannot write " + ablate_csv);
          write_grid_csv(out, g);
        }
        write_json(ablate_json, to_json(g, ablate_timings));
      }
    } else if (*synth) {
      synth_spec.kind = parse_synth_kind(synth_kind);
      const auto images = write_synthetic(synth_out, synth_spec);
      std::cout << "wrote " << images.size() << " images to " << synth_out << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "sopool: " << (e.stage().empty() ? "error: " : "") << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sopool: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
