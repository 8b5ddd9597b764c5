#pragma once

#include <string>
#include <vector>

#include "botmine/config.hpp"
#include "botmine/manifest.hpp"
#include "botmine/model_io.hpp"
#include "botmine/synth.hpp"

namespace botmine {

// Images of one split, decoded and preprocessed, with every cached feature
// the pipeline needs: whole-image descriptors for retrieval and canonical
// square frames (plus mirrored block grids) for dense detection.
struct Dataset {
  std::vector<ManifestEntry> entries;  // successfully loaded images only
  std::vector<int> labels;             // ids into class_names; -1 = unknown label
  std::vector<std::string> class_names;
  std::vector<GrayImage> canonical;  // canonical_side x canonical_side frames
  std::vector<FeatureVector> global_descriptors;
  std::vector<GridPair> grids;

  int num_classes() const { return static_cast<int>(class_names.size()); }
};

// Loads and featurizes a manifest. Unreadable images are skipped with a
// warning. When `label_table` is given (evaluation against a trained model),
// labels outside it map to -1; otherwise the table is the sorted set of
// labels seen. Parallel over images, deterministic output order.
Dataset prepare_dataset(const std::vector<ManifestEntry>& entries, const PipelineConfig& cfg,
                        const std::vector<std::string>* label_table = nullptr);

// Dataset-wide patch statistics over every sliding window of every canonical
// frame. Fixed-size image groups merge in order, so the result is
// bit-identical for any thread count.
BackgroundStats compute_background(const Dataset& ds, const PipelineConfig& cfg);

// Full mining stage: background stats, neighborhoods, discriminative maps,
// candidate proposal, entropy scoring, selection.
Model mine_pipeline(const std::vector<ManifestEntry>& train, const PipelineConfig& cfg);

// Bag-of-Triplets descriptors for every image (parallel map).
std::vector<FeatureVector> bot_batch(const Dataset& ds, const Model& model);

// Computes train-split BoTs and fits the one-vs-rest SVM into the model.
void train_pipeline(const std::vector<ManifestEntry>& train, Model* model);

// Accuracy, per-class accuracy and the confusion matrix on a test split.
// Writes confusion.csv under out_dir when non-empty.
EvalReport eval_pipeline(const std::vector<ManifestEntry>& test, const Model& model,
                         const std::string& out_dir);

// Landmark-pool triplet localization benchmark. For sampled same-class image
// pairs, one-shot detectors built from image 1's landmarks are localized in
// image 2's landmark pool under four modes: appearance only, order
// constraint, shape constraint, both combined.
struct LocalizationResult {
  // Mode order: appearance, order, shape, combined.
  std::array<double, 4> accuracy{};
  std::array<double, 4> improvement_pct{};  // relative to appearance only
  long long pairs = 0;
  long long trials = 0;
};

LocalizationResult bench_localize(const std::vector<ManifestEntry>& entries,
                                  const PipelineConfig& cfg, int num_pairs, int triplets_per_pair,
                                  std::uint64_t seed);

// Diagnostic renderings: top-triplet box overlays, per-class mean BoT
// responses (CSV + bar chart), and discriminative-map heat overlays.
void visualize_detections(const std::vector<ManifestEntry>& entries, const Model& model,
                          const std::string& out_dir, int max_images);
void visualize_bot_means(const std::vector<ManifestEntry>& entries, const Model& model,
                         const std::string& out_dir);
void visualize_dmap(const std::vector<ManifestEntry>& train, const PipelineConfig& cfg, int seed_id,
                    const std::string& out_dir);

}  // namespace botmine
