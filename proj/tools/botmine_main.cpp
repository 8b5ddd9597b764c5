// botmine: mine geometrically constrained patch triplets, build
// Bag-of-Triplets descriptors, and classify fine-grained categories.
#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>

#include "botmine/pipeline.hpp"

using namespace botmine;

namespace {

void add_config_flags(CLI::App* cmd, PipelineConfig* cfg) {
  cmd->add_option("--patch-side", cfg->patch_side, "Patch edge in pixels");
  cmd->add_option("--stride", cfg->stride, "Sliding-window stride");
  cmd->add_option("--target-width", cfg->target_width, "Crop resize width");
  cmd->add_option("--canonical-side", cfg->canonical_side, "Canonical detection frame");
  cmd->add_option("--descriptor-side", cfg->descriptor_side, "Whole-image descriptor frame");
  cmd->add_option("--neighborhood", cfg->neighborhood_size, "Neighborhood size incl. seed");
  cmd->add_option("--top-locations", cfg->top_locations, "Discriminative locations per seed");
  cmd->add_option("--triplets-per-class", cfg->triplets_per_class, "Selected triplets per class");
  cmd->add_option("--k-top", cfg->k_top, "Top-k detections per appearance model");
  cmd->add_option("--eta-o", cfg->eta_o, "Order-constraint weight in [0,1]");
  cmd->add_option("--eta-s", cfg->eta_s, "Shape-constraint weight in [0,1]");
  cmd->add_option("--overlap-max", cfg->overlap_max, "NMS IoU ceiling");
  cmd->add_option("--top-m", cfg->top_m, "Detections defining the entropy distribution");
  cmd->add_option("--svm-c", cfg->svm_c, "SVM regularization constant");
  cmd->add_option("--seed", cfg->rng_seed, "RNG seed");
  cmd->add_option("--negative-class-subsample", cfg->negative_class_subsample,
                  "Neighborhood retrieval: positive class + N random classes (0 = all)");
  cmd->add_option("--entropy-negative-classes", cfg->entropy_negative_classes,
                  "Entropy pool: positive class + N random classes (0 = full train set)");
  cmd->add_option("--seeds-per-class", cfg->seeds_per_class,
                  "Neighborhood seeds per class (0 = every train image)");
  cmd->add_option("--lambda-scale", cfg->lambda_scale, "Covariance ridge scale");
}

int run(int argc, char** argv) {
  CLI::App app{"discriminative triplet mining for fine-grained classification"};
  app.require_subcommand(1);

  if (const char* threads = std::getenv("BOTMINE_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }

  PipelineConfig cfg;

  // mine
  auto* mine = app.add_subcommand("mine", "Mine discriminative triplet detectors");
  std::string mine_train, mine_out = "model.botm";
  mine->add_option("--train", mine_train, "Training manifest (JSONL)")->required();
  mine->add_option("--out", mine_out, "Output model file");
  add_config_flags(mine, &cfg);

  // train
  auto* train = app.add_subcommand("train", "Train the linear classifier on BoT descriptors");
  std::string train_manifest, train_model_in, train_model_out;
  train->add_option("--train", train_manifest, "Training manifest (JSONL)")->required();
  train->add_option("--model", train_model_in, "Mined model file")->required();
  train->add_option("--out", train_model_out, "Output model (defaults to --model)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model");
  std::string eval_manifest, eval_model, eval_out;
  eval->add_option("--test", eval_manifest, "Test manifest (JSONL)")->required();
  eval->add_option("--model", eval_model, "Trained model file")->required();
  eval->add_option("--report-dir", eval_out, "Directory for confusion.csv");

  // synth-gen
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic benchmark corpus");
  SynthSpec spec;
  std::string synth_out = "synth";
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--classes", spec.classes, "Number of classes");
  synth->add_option("--train-per-class", spec.train_per_class, "Training images per class");
  synth->add_option("--test-per-class", spec.test_per_class, "Test images per class");
  synth->add_option("--canvas", spec.canvas, "Canvas side in pixels");
  synth->add_option("--glyph-size", spec.glyph_size, "Mark size in pixels");
  synth->add_option("--base-marks", spec.base_marks, "Shared structural marks");
  synth->add_option("--distractors", spec.distractors, "Distractor marks per image");
  synth->add_option("--pos-jitter", spec.pos_jitter, "Mark position jitter stddev");
  synth->add_option("--rot-jitter", spec.rot_jitter_deg, "Mark rotation jitter, degrees");
  synth->add_option("--noise", spec.noise_sigma, "Additive intensity noise stddev");
  synth->add_option("--min-separation", spec.min_separation, "Minimum mark separation");
  synth->add_option("--seed", spec.seed, "Corpus seed");

  // bench-localize
  auto* bench = app.add_subcommand("bench-localize",
                                   "Landmark-pool triplet localization benchmark");
  std::string bench_manifest;
  int bench_pairs = 1000, bench_triplets = 100;
  std::uint64_t bench_seed = 1;
  bench->add_option("--manifest", bench_manifest, "Manifest with landmarks")->required();
  bench->add_option("--pairs", bench_pairs, "Same-class image pairs to sample");
  bench->add_option("--triplets-per-pair", bench_triplets, "Triplets tested per pair");
  bench->add_option("--bench-seed", bench_seed, "Sampling seed");
  add_config_flags(bench, &cfg);

  // visualize
  auto* vis = app.add_subcommand("visualize", "Write diagnostic overlays and plots");
  std::string vis_manifest, vis_model, vis_out = "viz";
  int vis_max = 8, vis_dmap_seed = -1;
  bool vis_bot_means = false;
  vis->add_option("--manifest", vis_manifest, "Manifest (JSONL)")->required();
  vis->add_option("--model", vis_model, "Model file (for detections / BoT means)");
  vis->add_option("--out", vis_out, "Output directory");
  vis->add_option("--detections", vis_max, "Images to overlay with the top triplet");
  vis->add_option("--dmap-seed", vis_dmap_seed, "Render the discriminative map of this seed");
  vis->add_flag("--bot-means", vis_bot_means, "Write per-class mean BoT responses (CSV+PNG)");
  add_config_flags(vis, &cfg);

  CLI11_PARSE(app, argc, argv);

  if (mine->parsed()) {
    cfg.validate();
    const Model model = mine_pipeline(load_manifest(mine_train), cfg);
    save_model(mine_out, model);
    std::cout << "mined " << model.triplets.size() << " triplets -> " << mine_out << "\n";
  } else if (train->parsed()) {
    Model model = load_model(train_model_in);
    train_pipeline(load_manifest(train_manifest), &model);
    const std::string out = train_model_out.empty() ? train_model_in : train_model_out;
    save_model(out, model);
    std::cout << "trained classifier over " << model.triplets.size() << " triplets -> " << out
              << "\n";
  } else if (eval->parsed()) {
    const Model model = load_model(eval_model);
    const EvalReport report = eval_pipeline(load_manifest(eval_manifest), model, eval_out);
    std::cout << "accuracy " << report.accuracy << " (" << report.correct << "/" << report.total
              << ")\n";
    for (size_t c = 0; c < report.per_class_accuracy.size(); ++c) {
      std::cout << "  " << model.class_names[c] << ": " << report.per_class_accuracy[c] << "\n";
    }
  } else if (synth->parsed()) {
    const SynthCorpus corpus = generate_synth_corpus(spec, synth_out);
    std::cout << "wrote " << corpus.train.size() << " train / " << corpus.test.size()
              << " test images under " << synth_out << "\n";
  } else if (bench->parsed()) {
    cfg.validate();
    const LocalizationResult r =
        bench_localize(load_manifest(bench_manifest), cfg, bench_pairs, bench_triplets, bench_seed);
    static const char* names[4] = {"appearance-only", "order", "shape", "combined"};
    std::cout << "localization over " << r.trials << " triplets (" << r.pairs << " pairs)\n";
    for (int m = 0; m < 4; ++m) {
      std::printf("  %-16s %6.2f%%   improvement %+6.1f%%\n", names[m], 100.0 * r.accuracy[m],
                  r.improvement_pct[m]);
    }
  } else if (vis->parsed()) {
    const auto entries = load_manifest(vis_manifest);
    if (vis_dmap_seed >= 0) {
      visualize_dmap(entries, cfg, vis_dmap_seed, vis_out);
    }
    if (!vis_model.empty()) {
      const Model model = load_model(vis_model);
      if (vis_max > 0) visualize_detections(entries, model, vis_out, vis_max);
      if (vis_bot_means) visualize_bot_means(entries, model, vis_out);
    } else if (vis_dmap_seed < 0) {
      throw ConfigError("visualize: pass --model and/or --dmap-seed");
    }
    std::cout << "wrote diagnostics under " << vis_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
